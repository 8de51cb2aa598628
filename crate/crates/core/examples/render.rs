//! Draws the bundled layouts as SVG files.
//!
//! cargo run --example render -- out-dir

use std::path::{Path, PathBuf};

use trussforge::document::read_layout;
use trussforge::render::{render_svg, Palette, RenderStyle};
use trussforge::testbeds::load_case;

fn main() {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "figures".into()).into();
    std::fs::create_dir_all(&out).expect("output directory");
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/layouts");
    let figures = [
        ("seventeen-bar-fragment", "seventeen-bar", None),
        ("sundial-p7", "sundial", Some(7)),
        ("sundial-p8", "sundial", Some(8)),
        ("sundial-p9", "sundial", Some(9)),
    ];
    for (file, case, p) in figures {
        let case = load_case(case, p).expect("bundled case");
        let layout = read_layout(&data.join(format!("{file}.json"))).expect("readable").expect("layout");
        for (suffix, palette) in [("", Palette::Stress), ("-mono", Palette::Mono)] {
            let style = RenderStyle {
                palette,
                ..RenderStyle::default()
            };
            let path = out.join(format!("{file}{suffix}.svg"));
            std::fs::write(&path, render_svg(&layout, &case, &style)).expect("write svg");
            println!("wrote {}", path.display());
        }
    }
}
