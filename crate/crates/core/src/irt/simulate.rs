use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{invalid, prob_correct, Cell, ItemParams, ResponseMatrix, Result};

/// Draws a complete response matrix from the 2PL model.
///
/// Model ids are `sim-000`, `sim-001`, …; cells are drawn row by row from a
/// ChaCha8 stream seeded with `seed`, so equal seeds give equal matrices on
/// every platform.
pub fn simulate_matrix(items: &[ItemParams], thetas: &[f64], seed: u64) -> Result<ResponseMatrix> {
    if let Some(t) = thetas.iter().find(|t| !t.is_finite()) {
        return Err(invalid(format!("non-finite ability {t}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells = Vec::with_capacity(items.len() * thetas.len());
    for &theta in thetas {
        for item in items {
            let p = prob_correct(item.a, item.b, theta)?;
            cells.push(Cell::from_correct(rng.random::<f64>() < p));
        }
    }
    ResponseMatrix::new(
        (0..thetas.len()).map(|m| format!("sim-{m:03}")).collect(),
        items.iter().map(|i| i.item_id.clone()).collect(),
        cells,
    )
}
