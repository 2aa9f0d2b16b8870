/** Percentage formatting for probability displays.
 *
 * Naive per-value rounding can make the displayed percentages sum to 99.9 or
 * 100.1, which reads as a bug next to medical output. Largest-remainder
 * rounding at one-decimal resolution keeps every value within half a tenth of
 * its exact percentage while forcing the total to exactly 100.0.
 */

/**
 * Round probabilities (summing to ~1) to one-decimal percentages that sum to
 * exactly 100.0. Returns values in the input order.
 */
export function displayPercentages(probs: number[]): number[] {
  if (probs.length === 0) {
    return [];
  }
  // Work in integer tenths of a percent to dodge float drift.
  const exactTenths = probs.map((p) => p * 1000);
  const floors = exactTenths.map((t) => Math.floor(t + 1e-9));
  let leftover = 1000 - floors.reduce((a, b) => a + b, 0);
  const order = exactTenths
    .map((t, i) => ({ i, frac: t - floors[i] }))
    .sort((a, b) => b.frac - a.frac || a.i - b.i);
  for (let k = 0; leftover > 0 && k < order.length; k += 1, leftover -= 1) {
    floors[order[k].i] += 1;
  }
  // leftover < 0 cannot happen for inputs summing to <= 1 + 1e-3; guard anyway.
  for (let k = order.length - 1; leftover < 0 && k >= 0; k -= 1) {
    if (floors[order[k].i] > 0) {
      floors[order[k].i] -= 1;
      leftover += 1;
    }
  }
  return floors.map((t) => t / 10);
}

/** Format one display percentage with a fixed single decimal, e.g. "70.0%". */
export function formatPercent(value: number): string {
  return `${value.toFixed(1)}%`;
}
