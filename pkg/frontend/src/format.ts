// Feature-summary helpers. 53 raw values are unreadable, so each row shows a
// sparkline over the 8 highest-variance features of the current queue.
// Selection is deterministic: variance over the fetched rows, descending,
// ties broken by the lower feature index.

export function topVarianceIndices(rows: number[][], k = 8): number[] {
  if (rows.length === 0) return [];
  const dim = rows[0].length;
  const take = Math.min(k, dim);
  const variances: { index: number; variance: number }[] = [];
  for (let j = 0; j < dim; j++) {
    let mean = 0;
    for (const row of rows) mean += row[j];
    mean /= rows.length;
    let variance = 0;
    for (const row of rows) variance += (row[j] - mean) ** 2;
    variances.push({ index: j, variance: variance / rows.length });
  }
  variances.sort((a, b) => b.variance - a.variance || a.index - b.index);
  return variances.slice(0, take).map((v) => v.index);
}

// Per selected feature, scale values to [0, 1] across the queue so sparkline
// bars are comparable between rows; constant features render as 0.5.
export function sparklineData(rows: number[][], indices: number[]): number[][] {
  const lo = indices.map((j) => Math.min(...rows.map((r) => r[j])));
  const hi = indices.map((j) => Math.max(...rows.map((r) => r[j])));
  return rows.map((row) =>
    indices.map((j, pos) => {
      const span = hi[pos] - lo[pos];
      return span === 0 ? 0.5 : (row[j] - lo[pos]) / span;
    }),
  );
}

export function formatPercent(x: number | null | undefined, digits = 1): string {
  if (x === null || x === undefined || Number.isNaN(x)) return "–";
  return `${(100 * x).toFixed(digits)}%`;
}

export function formatMetric(x: unknown, digits = 4): string {
  return typeof x === "number" ? x.toFixed(digits) : "–";
}
