import { describe, expect, it } from "vitest";

import { besselJ, besselRow, dimension, sweepAmplitudes } from "../src/ladder.js";

// frozen from an independent reference implementation
const REFERENCE: Array<[number, number, number]> = [
  [0, 1.0, 0.7651976865579666],
  [0, 0.5, 0.938469807240813],
  [3, 2.7, 0.25404529158722744],
  [7, 4.4, 0.026433279643342272],
  [12, 19.3, -0.19065781225949727],
  [2, 8.0, -0.11299172042407524],
  [0, 15.7, -0.14007021182904855],
  [25, 30.0, 0.08429274064303181],
];

describe("bessel", () => {
  it("matches frozen reference values to 1e-12", () => {
    for (const [n, x, value] of REFERENCE) {
      expect(Math.abs(besselJ(n, x) - value)).toBeLessThan(1e-12);
    }
  });

  it("series identities", () => {
    expect(besselJ(0, 0)).toBe(1);
    expect(besselJ(3, 0)).toBe(0);
  });

  it("negative order symmetry", () => {
    for (const n of [1, 2, 5, 8]) {
      for (const x of [0.3, 2.9, 11.4]) {
        const sign = n % 2 === 1 ? -1 : 1;
        expect(besselJ(-n, x)).toBeCloseTo(sign * besselJ(n, x), 13);
      }
    }
  });

  it("recurrence J_{n-1} + J_{n+1} = (2n/x) J_n", () => {
    for (const x of [0.4, 3.3, 9.8, 17.2]) {
      for (let n = -20; n <= 20; n++) {
        const resid = besselJ(n - 1, x) + besselJ(n + 1, x) - ((2 * n) / x) * besselJ(n, x);
        expect(Math.abs(resid)).toBeLessThan(1e-10);
      }
    }
  });

  it("rows agree with scalar evaluations", () => {
    const row = besselRow(12, 5.5);
    for (let n = 0; n <= 12; n++) {
      expect(row[n]).toBeCloseTo(besselJ(n, 5.5), 13);
    }
  });
});

describe("sweep amplitudes", () => {
  it("zero coupling is the embedded identity", () => {
    const out = { nMin: -3, nMax: 3 };
    const input = { nMin: -1, nMax: 1 };
    const amps = sweepAmplitudes(0, 1.23, out, input);
    for (let i = 0; i < amps.rows; i++) {
      for (let j = 0; j < amps.cols; j++) {
        const expected = out.nMin + i === input.nMin + j ? 1 : 0;
        expect(amps.re[i * amps.cols + j]).toBeCloseTo(expected, 14);
        expect(amps.im[i * amps.cols + j]).toBeCloseTo(0, 14);
      }
    }
  });

  it("columns are unit vectors over a wide detection window", () => {
    const out = { nMin: -10, nMax: 10 };
    const input = { nMin: -1, nMax: 1 };
    const amps = sweepAmplitudes(0.9, 0.4, out, input);
    for (let j = 0; j < amps.cols; j++) {
      let norm = 0;
      for (let i = 0; i < amps.rows; i++) {
        norm += amps.re[i * amps.cols + j] ** 2 + amps.im[i * amps.cols + j] ** 2;
      }
      expect(norm).toBeCloseTo(1, 9);
    }
  });

  it("window dimension helper", () => {
    expect(dimension({ nMin: -4, nMax: 3 })).toBe(8);
  });
});
