/**
 * Minimal dense complex matrices as separate real/imaginary Float64Arrays,
 * plus the Hermitian eigenvalue machinery the reconstructor needs
 * (physicality projection and Uhlmann fidelity).
 *
 * Hermitian work is done in the real embedding H -> [[Re, -Im], [Im, Re]],
 * which is a *-homomorphism: eigen-decomposing the 2d x 2d symmetric image
 * with a cyclic Jacobi sweep gives each complex eigenvalue twice, and any
 * spectral function applied there maps back to the complex matrix exactly.
 */

export interface CMatrix {
  d: number;
  re: Float64Array;
  im: Float64Array;
}

export function czeros(d: number): CMatrix {
  return { d, re: new Float64Array(d * d), im: new Float64Array(d * d) };
}

export function clone(m: CMatrix): CMatrix {
  return { d: m.d, re: m.re.slice(), im: m.im.slice() };
}

export function trace(m: CMatrix): number {
  let t = 0;
  for (let i = 0; i < m.d; i++) t += m.re[i * m.d + i];
  return t;
}

export function hermitize(m: CMatrix): CMatrix {
  const { d } = m;
  const out = czeros(d);
  for (let i = 0; i < d; i++) {
    for (let j = 0; j < d; j++) {
      out.re[i * d + j] = (m.re[i * d + j] + m.re[j * d + i]) / 2;
      out.im[i * d + j] = (m.im[i * d + j] - m.im[j * d + i]) / 2;
    }
  }
  return out;
}

export function frobeniusDistance(a: CMatrix, b: CMatrix): number {
  let s = 0;
  for (let k = 0; k < a.re.length; k++) {
    const dr = a.re[k] - b.re[k];
    const di = a.im[k] - b.im[k];
    s += dr * dr + di * di;
  }
  return Math.sqrt(s);
}

/** Real symmetric embedding [[Re, -Im], [Im, Re]] of a Hermitian matrix. */
function embed(m: CMatrix): Float64Array {
  const d = m.d;
  const n = 2 * d;
  const out = new Float64Array(n * n);
  for (let i = 0; i < d; i++) {
    for (let j = 0; j < d; j++) {
      const re = m.re[i * d + j];
      const im = m.im[i * d + j];
      out[i * n + j] = re;
      out[(i + d) * n + (j + d)] = re;
      out[i * n + (j + d)] = -im;
      out[(i + d) * n + j] = im;
    }
  }
  return out;
}

function unembed(x: Float64Array, d: number): CMatrix {
  const n = 2 * d;
  const out = czeros(d);
  for (let i = 0; i < d; i++) {
    for (let j = 0; j < d; j++) {
      out.re[i * d + j] = (x[i * n + j] + x[(i + d) * n + (j + d)]) / 2;
      out.im[i * d + j] = (x[(i + d) * n + j] - x[i * n + (j + d)]) / 2;
    }
  }
  return out;
}

/** Cyclic Jacobi eigenvalue iteration for a dense symmetric matrix. */
export function jacobiEigh(a: Float64Array, n: number): { values: Float64Array; vectors: Float64Array } {
  const m = a.slice();
  const v = new Float64Array(n * n);
  for (let i = 0; i < n; i++) v[i * n + i] = 1;
  const maxSweeps = 60;
  for (let sweep = 0; sweep < maxSweeps; sweep++) {
    let off = 0;
    for (let p = 0; p < n; p++) {
      for (let q = p + 1; q < n; q++) off += m[p * n + q] * m[p * n + q];
    }
    if (Math.sqrt(off) < 1e-14 * (1 + Math.abs(m[0]))) break;
    for (let p = 0; p < n - 1; p++) {
      for (let q = p + 1; q < n; q++) {
        const apq = m[p * n + q];
        if (Math.abs(apq) < 1e-300) continue;
        const app = m[p * n + p];
        const aqq = m[q * n + q];
        const tau = (aqq - app) / (2 * apq);
        const t = Math.sign(tau >= 0 ? 1 : -1) / (Math.abs(tau) + Math.sqrt(1 + tau * tau));
        const c = 1 / Math.sqrt(1 + t * t);
        const s = t * c;
        for (let k = 0; k < n; k++) {
          const mkp = m[k * n + p];
          const mkq = m[k * n + q];
          m[k * n + p] = c * mkp - s * mkq;
          m[k * n + q] = s * mkp + c * mkq;
        }
        for (let k = 0; k < n; k++) {
          const mpk = m[p * n + k];
          const mqk = m[q * n + k];
          m[p * n + k] = c * mpk - s * mqk;
          m[q * n + k] = s * mpk + c * mqk;
        }
        for (let k = 0; k < n; k++) {
          const vkp = v[k * n + p];
          const vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }
  const values = new Float64Array(n);
  for (let i = 0; i < n; i++) values[i] = m[i * n + i];
  return { values, vectors: v };
}

/** Apply a spectral function to a Hermitian matrix via the real embedding. */
export function spectralMap(m: CMatrix, fn: (lambda: number) => number): CMatrix {
  const d = m.d;
  const n = 2 * d;
  const { values, vectors } = jacobiEigh(embed(m), n);
  const mapped = new Float64Array(n * n);
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < n; j++) {
      let s = 0;
      for (let k = 0; k < n; k++) s += vectors[i * n + k] * fn(values[k]) * vectors[j * n + k];
      mapped[i * n + j] = s;
    }
  }
  return unembed(mapped, d);
}

export function matmul(a: CMatrix, b: CMatrix): CMatrix {
  const d = a.d;
  const out = czeros(d);
  for (let i = 0; i < d; i++) {
    for (let k = 0; k < d; k++) {
      const ar = a.re[i * d + k];
      const ai = a.im[i * d + k];
      if (ar === 0 && ai === 0) continue;
      for (let j = 0; j < d; j++) {
        const br = b.re[k * d + j];
        const bi = b.im[k * d + j];
        out.re[i * d + j] += ar * br - ai * bi;
        out.im[i * d + j] += ar * bi + ai * br;
      }
    }
  }
  return out;
}

/**
 * Clip to the nearest physical state: Hermitize, floor negative
 * eigenvalues at zero, renormalise to unit trace.
 */
export function projectPhysical(m: CMatrix): CMatrix {
  const herm = hermitize(m);
  const clipped = spectralMap(herm, (l) => (l > 0 ? l : 0));
  const t = trace(clipped);
  if (!(t > 0)) throw new Error("matrix has no positive spectral weight");
  const out = czeros(m.d);
  for (let k = 0; k < out.re.length; k++) {
    out.re[k] = clipped.re[k] / t;
    out.im[k] = clipped.im[k] / t;
  }
  return hermitize(out);
}

/** Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, clipped to [0, 1]. */
export function fidelity(rho: CMatrix, sigma: CMatrix): number {
  const sq = spectralMap(hermitize(rho), (l) => (l > 0 ? Math.sqrt(l) : 0));
  const inner = matmul(matmul(sq, sigma), sq);
  const root = spectralMap(hermitize(inner), (l) => (l > 0 ? Math.sqrt(l) : 0));
  const f = trace(root) ** 2;
  return Math.min(Math.max(f, 0), 1);
}
