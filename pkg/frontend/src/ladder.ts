/**
 * Bessel kernels and the phase-swept interaction, matching the Python
 * toolkit entry for entry (cross-checked against its golden output).
 */

const SERIES_X_MAX = 8.0;

function besselSeries(n: number, x: number): number {
  let term = 1.0;
  for (let k = 1; k <= n; k++) term *= x / 2 / k;
  if (term === 0) return 0;
  let total = term;
  let k = 0;
  while (k <= 300) {
    k += 1;
    term *= -(x * x) / 4 / (k * (n + k));
    total += term;
    if (Math.abs(term) < 1e-18 * Math.max(1, Math.abs(total))) break;
  }
  return total;
}

/** J_0(x) .. J_nTop(x) for x >= 0: power series below 8, Miller recurrence above. */
export function besselRow(nTop: number, x: number): Float64Array {
  const row = new Float64Array(nTop + 1);
  if (x === 0) {
    row[0] = 1;
    return row;
  }
  if (x < SERIES_X_MAX) {
    for (let n = 0; n <= nTop; n++) row[n] = besselSeries(n, x);
    return row;
  }
  let m = Math.max(nTop, Math.floor(x)) + 1;
  m += Math.floor(16 + 2 * Math.sqrt(m));
  if (m % 2 === 1) m += 1;
  const vals = new Float64Array(m + 1);
  let jp = 0;
  let j = 1e-300;
  vals[m] = j;
  for (let k = m; k >= 1; k--) {
    const jm = (2 * k / x) * j - jp;
    jp = j;
    j = jm;
    vals[k - 1] = j;
    if (Math.abs(j) > 1e250) {
      for (let i = k - 1; i <= m; i++) vals[i] /= 1e250;
      jp /= 1e250;
      j = vals[k - 1];
    }
  }
  let norm = vals[0];
  for (let k = 2; k <= m; k += 2) norm += 2 * vals[k];
  const out = new Float64Array(nTop + 1);
  for (let n = 0; n <= nTop; n++) out[n] = vals[n] / norm;
  return out;
}

/** J_n(x) for any integer order, J_{-n} = (-1)^n J_n. */
export function besselJ(n: number, x: number): number {
  const an = Math.abs(n);
  if (an > 30 + 2 * x) return 0; // below 1e-40 out here
  const sign = n < 0 && an % 2 === 1 ? -1 : 1;
  return sign * besselRow(an, x)[an];
}

export interface Window {
  nMin: number;
  nMax: number;
}

export function dimension(w: Window): number {
  return w.nMax - w.nMin + 1;
}

/**
 * Transition amplitudes <N| U_phi |a> of the swept interaction for one
 * phase: entry (N, a) = J_{N-a}(2 gAbs) e^{i (N-a) phi}.
 */
export function sweepAmplitudes(
  gAbs: number,
  phi: number,
  out: Window,
  input: Window,
): { re: Float64Array; im: Float64Array; rows: number; cols: number } {
  const rows = dimension(out);
  const cols = dimension(input);
  const maxOffset = Math.max(
    Math.abs(out.nMax - input.nMin),
    Math.abs(out.nMin - input.nMax),
  );
  const jrow = besselRow(maxOffset, 2 * gAbs);
  const re = new Float64Array(rows * cols);
  const im = new Float64Array(rows * cols);
  for (let i = 0; i < rows; i++) {
    const bigN = out.nMin + i;
    for (let j = 0; j < cols; j++) {
      const a = bigN - (input.nMin + j);
      const mag = (a < 0 && Math.abs(a) % 2 === 1 ? -1 : 1) * jrow[Math.abs(a)];
      re[i * cols + j] = mag * Math.cos(a * phi);
      im[i * cols + j] = mag * Math.sin(a * phi);
    }
  }
  return { re, im, rows, cols };
}
