use serde::{Deserialize, Serialize};

/// One step of a cost-supply curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupplyPoint {
    pub id: String,
    /// Amount contributed by this item (Mt/y).
    pub amount: f64,
    /// Cumulative amount up to and including this item (Mt/y).
    pub cumulative: f64,
    /// Unit cost of this item ($/t).
    pub cost: f64,
}

/// Sort items by ascending unit cost (ties by id) and accumulate amounts.
pub fn supply_curve<I>(items: I) -> Vec<SupplyPoint>
where
    I: IntoIterator<Item = (String, f64, f64)>,
{
    let mut items: Vec<(String, f64, f64)> = items.into_iter().collect();
    items.sort_by(|a, b| a.2.total_cmp(&b.2).then_with(|| a.0.cmp(&b.0)));
    let mut cumulative = 0.0;
    items
        .into_iter()
        .map(|(id, amount, cost)| {
            cumulative += amount;
            SupplyPoint {
                id,
                amount,
                cumulative,
                cost,
            }
        })
        .collect()
}
