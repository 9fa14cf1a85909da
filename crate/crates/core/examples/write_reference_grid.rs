//! Regenerates `data/reference_grid.json`.

fn main() -> nppr::Result<()> {
    let grid = nppr::sim::reference_grid(1);
    nppr::io::write_grid(&grid, std::io::stdout().lock())
}
