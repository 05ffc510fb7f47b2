import assert from "node:assert/strict";
import { test } from "node:test";
import { join } from "node:path";

import {
  ComplexMatrix,
  ad_bounds,
  asym_scaling_qfi,
  iss_channel_qfi,
  kraus_round_trip,
  mop_channel_qfi,
  parity_suite,
} from "../src/index";

const GOLDEN = join(__dirname, "..", "..", "golden", "golden_vectors.json");
const DEPH = { kind: "builtin", name: "dephasing", p: 0.75 } as const;

test("golden vectors match across the boundary within 1e-12", () => {
  const report = parity_suite(GOLDEN);
  for (const entry of report.entries) {
    assert.ok(
      entry.deviation < 1e-12,
      `${entry.name}: deviation ${entry.deviation}`,
    );
  }
  assert.ok(report.entries.length >= 8);
  console.log(
    `parity: ${report.entries.length} entries, max deviation ` +
    `${report.maxDeviation}`,
  );
});

test("dephasing channel QFI through the bindings", () => {
  const value = mop_channel_qfi(DEPH);
  assert.ok(Math.abs(value - 0.25) < 1e-5);
});

test("scaling classification through the bindings", () => {
  const scaling = asym_scaling_qfi({
    kind: "builtin", name: "dephasing", p: 1.0,
  });
  assert.equal(scaling.exponent, 2);
  assert.ok(Math.abs(scaling.coefficient - 1.0) < 1e-6);
});

test("bound series arrives aligned", () => {
  const series = ad_bounds(DEPH, 5);
  assert.deepEqual(series.ns, [1, 2, 3, 4, 5]);
  assert.ok(Math.abs(series.values[0] - 0.25) < 1e-6);
  for (let i = 1; i < series.values.length; i++) {
    assert.ok(series.values[i] >= series.values[i - 1] - 1e-9);
  }
});

test("see-saw seed determinism across the boundary", () => {
  const a = iss_channel_qfi(DEPH, { ancilla_dim: 1, seed: 7 });
  const b = iss_channel_qfi(DEPH, { ancilla_dim: 1, seed: 7 });
  assert.deepEqual(a.trace, b.trace);
  assert.equal(a.qfi, b.qfi);
});

test("complex matrices survive the boundary bit-exactly", () => {
  const matrix: ComplexMatrix = [
    [[Math.SQRT1_2, 0], [0.1234567890123456789, -Math.PI]],
    [[-Math.E, 1e-17], [0.75, 0.25]],
  ];
  const back = kraus_round_trip(matrix);
  for (let i = 0; i < matrix.length; i++) {
    for (let j = 0; j < matrix[i].length; j++) {
      assert.equal(back[i][j][0], matrix[i][j][0]);
      assert.equal(back[i][j][1], matrix[i][j][1]);
    }
  }
});
