//! Regenerates one figure preset as CSV and SVG in a directory.
//!
//! ```sh
//! cargo run --release --example figure_sweep -- fig7 out 200000
//! ```

use std::fs;
use std::path::PathBuf;

use raoi::bench::{self, Preset, Tolerance};

fn main() -> raoi::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let preset: Preset = args.first().map_or("fig7", String::as_str).parse()?;
    let dir = PathBuf::from(args.get(1).map_or("out", String::as_str));
    let packets: usize = match args.get(2) {
        Some(p) => p.parse().map_err(|e| raoi::Error::Parse(format!("packets: {e}")))?,
        None => 200_000,
    };

    let spec = preset.spec(packets, 1);
    let rows = bench::run_sweep(&spec, &Tolerance::default())?;
    fs::create_dir_all(&dir).map_err(|e| raoi::Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    let csv = dir.join(format!("{}.csv", preset.name()));
    let file = fs::File::create(&csv).map_err(|e| raoi::Error::Io {
        path: csv.clone(),
        source: e,
    })?;
    bench::write_rows(file, &spec.header_comments(), &rows)?;
    let svg = dir.join(format!("{}.svg", preset.name()));
    fs::write(&svg, bench::render_svg(preset.title(), &rows)).map_err(|e| raoi::Error::Io {
        path: svg.clone(),
        source: e,
    })?;
    println!(
        "{}: {} rows -> {} and {}",
        preset.title(),
        rows.len(),
        csv.display(),
        svg.display()
    );
    Ok(())
}
