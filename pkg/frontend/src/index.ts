/**
 * TypeScript bindings for the qfi-forge quantum-metrology optimizer.
 *
 * Every function delegates to the Python CLI through a scenario file;
 * no numerics are reimplemented here. Complex matrices cross the
 * boundary as nested arrays of [re, im] pairs, matching the library's
 * serialization, so values survive the trip bit-exactly.
 *
 * The exported names mirror the library's high-level surface:
 * mop_channel_qfi, mop_parallel_qfi, mop_adaptive_qfi, iss_channel_qfi,
 * iss_parallel_qfi, iss_adaptive_qfi, iss_tnet_parallel_qfi,
 * iss_tnet_adaptive_qfi, par_bounds, ad_bounds, ad_bounds_correlated,
 * asym_scaling_qfi, and iss_opt via a strategy-description file.
 */

import { spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export type Complex = [number, number];
export type ComplexMatrix = Complex[][];

export interface BuiltinChannelSpec {
  kind: "builtin";
  name: "dephasing" | "amplitude_damping";
  p: number;
  rot_like?: boolean;
  c?: number;
  splitting?: "one_sided" | "symmetric";
}

export interface KrausChannelSpec {
  kind: "kraus";
  operators: ComplexMatrix[];
  derivatives?: ComplexMatrix[];
  env_dim?: number;
}

export interface ChoiChannelSpec {
  kind: "choi";
  matrix: ComplexMatrix;
  dmatrix?: ComplexMatrix;
  env_dim?: number;
}

export type ChannelSpec = BuiltinChannelSpec | KrausChannelSpec |
  ChoiChannelSpec;

export interface IssOptions {
  ancilla_dim?: number;
  seed?: number;
  rel_tol?: number;
  stall_sweeps?: number;
  max_sweeps?: number;
  mps_bond_dim?: number;
  sld_bond_dim?: number;
  block_size?: number;
  strategy_file?: string;
}

export interface IssOutcome {
  qfi: number;
  status: string;
  trace: number[];
}

export interface BoundSeries {
  ns: number[];
  values: number[];
}

export interface AsymScaling {
  coefficient: number;
  exponent: number;
}

/** Python interpreter used to launch the CLI; override via QFI_FORGE_PY. */
const PYTHON = process.env.QFI_FORGE_PY ?? "python3";

interface RawRecord {
  method: string;
  n: number | string;
  value: string | number;
  status: string;
  seed: number;
  trace?: number[];
}

function runCli(config: Record<string, unknown>): RawRecord[] {
  const dir = mkdtempSync(join(tmpdir(), "qfi-forge-"));
  try {
    const cfgPath = join(dir, "config.json");
    const outPath = join(dir, "out.json");
    writeFileSync(cfgPath, JSON.stringify({
      ...config,
      output: { path: outPath, format: "json" },
    }));
    const res = spawnSync(PYTHON, ["-m", "qfi_forge.cli", "run", cfgPath], {
      encoding: "utf8",
      timeout: 30 * 60 * 1000,
    });
    if (res.status !== 0) {
      throw new Error(
        `qfi-forge run failed (rc=${res.status}): ${res.stderr}`,
      );
    }
    return JSON.parse(readFileSync(outPath, "utf8")) as RawRecord[];
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

function scalar(records: RawRecord[]): number {
  if (records.length !== 1) {
    throw new Error(`expected one record, got ${records.length}`);
  }
  return Number(records[0].value);
}

function outcome(records: RawRecord[]): IssOutcome {
  if (records.length !== 1) {
    throw new Error(`expected one record, got ${records.length}`);
  }
  return {
    qfi: Number(records[0].value),
    status: records[0].status,
    trace: records[0].trace ?? [],
  };
}

function series(records: RawRecord[]): BoundSeries {
  return {
    ns: records.map((r) => Number(r.n)),
    values: records.map((r) => Number(r.value)),
  };
}

export function mop_channel_qfi(channel: ChannelSpec): number {
  return scalar(runCli({ channel, method: "mop_channel", n: 1 }));
}

export function mop_parallel_qfi(channel: ChannelSpec, n: number): number {
  return scalar(runCli({ channel, method: "mop_parallel", n }));
}

export function mop_adaptive_qfi(channel: ChannelSpec, n: number): number {
  return scalar(runCli({ channel, method: "mop_adaptive", n }));
}

export function iss_channel_qfi(
  channel: ChannelSpec, options: IssOptions = {},
): IssOutcome {
  return outcome(runCli({ channel, method: "iss_channel", n: 1, options }));
}

export function iss_parallel_qfi(
  channel: ChannelSpec, n: number, options: IssOptions = {},
): IssOutcome {
  return outcome(runCli({ channel, method: "iss_parallel", n, options }));
}

export function iss_adaptive_qfi(
  channel: ChannelSpec, n: number, options: IssOptions = {},
): IssOutcome {
  return outcome(runCli({ channel, method: "iss_adaptive", n, options }));
}

export function iss_tnet_parallel_qfi(
  channel: ChannelSpec, n: number, options: IssOptions = {},
): IssOutcome {
  if (options.mps_bond_dim === undefined) {
    throw new Error("iss_tnet_parallel_qfi requires options.mps_bond_dim");
  }
  return outcome(
    runCli({ channel, method: "iss_tnet_parallel", n, options }),
  );
}

export function iss_tnet_adaptive_qfi(
  channel: ChannelSpec, n: number, options: IssOptions = {},
): IssOutcome {
  return outcome(
    runCli({ channel, method: "iss_tnet_adaptive", n, options }),
  );
}

export function iss_opt(
  strategyFile: string, options: IssOptions = {},
): IssOutcome {
  return outcome(runCli({
    method: "iss_custom",
    n: 1,
    options: { ...options, strategy_file: strategyFile },
  }));
}

export function par_bounds(channel: ChannelSpec, n: number): BoundSeries {
  return series(runCli({ channel, method: "par_bounds", n }));
}

export function ad_bounds(channel: ChannelSpec, n: number): BoundSeries {
  return series(runCli({ channel, method: "ad_bounds", n }));
}

export function ad_bounds_correlated(
  channel: ChannelSpec, n: number, blockSize = 1,
): BoundSeries {
  return series(runCli({
    channel, method: "ad_bounds_correlated", n,
    options: { block_size: blockSize },
  }));
}

export function asym_scaling_qfi(channel: ChannelSpec): AsymScaling {
  const records = runCli({ channel, method: "asym", n: 1 });
  return {
    coefficient: Number(records[0].value),
    exponent: Number(records[0].n),
  };
}

/**
 * Round-trip a complex matrix through the Python-side parser.
 * Returns the re-serialized matrix; doubles survive bit-exactly.
 */
export function kraus_round_trip(matrix: ComplexMatrix): ComplexMatrix {
  const code = [
    "import json, sys",
    "from qfi_forge.qcore import complex_from_json, complex_to_json",
    "data = json.load(sys.stdin)",
    "print(json.dumps(complex_to_json(complex_from_json(data))))",
  ].join("\n");
  const res = spawnSync(PYTHON, ["-c", code], {
    input: JSON.stringify(matrix),
    encoding: "utf8",
  });
  if (res.status !== 0) {
    throw new Error(`round trip failed: ${res.stderr}`);
  }
  return JSON.parse(res.stdout) as ComplexMatrix;
}

export interface ParityEntry {
  name: string;
  expected: number[];
  actual: number[];
  deviation: number;
}

export interface ParityReport {
  entries: ParityEntry[];
  maxDeviation: number;
}

interface GoldenEntry {
  name: string;
  kind: "scalar" | "series" | "asym" | "iss";
  channel?: ChannelSpec;
  n?: number;
  options?: IssOptions;
  values: number[];
}

/**
 * Replay golden vectors produced by the Python library through these
 * bindings and report the maximum deviation (expected: 0 up to float
 * printing, i.e. far below 1e-12).
 */
export function parity_suite(goldenPath: string): ParityReport {
  const golden = JSON.parse(readFileSync(goldenPath, "utf8")) as
    GoldenEntry[];
  const entries: ParityEntry[] = [];
  for (const g of golden) {
    let actual: number[];
    switch (g.kind) {
      case "scalar": {
        const method = g.name.startsWith("mop_parallel")
          ? mop_parallel_qfi(g.channel!, g.n!)
          : g.name.startsWith("mop_adaptive")
            ? mop_adaptive_qfi(g.channel!, g.n!)
            : mop_channel_qfi(g.channel!);
        actual = [method];
        break;
      }
      case "iss": {
        const out = g.name.startsWith("iss_tnet_parallel")
          ? iss_tnet_parallel_qfi(g.channel!, g.n!, g.options)
          : iss_channel_qfi(g.channel!, g.options);
        actual = [out.qfi, ...out.trace];
        break;
      }
      case "series": {
        const s = g.name.startsWith("par_bounds")
          ? par_bounds(g.channel!, g.n!)
          : g.name.startsWith("ad_bounds_correlated")
            ? ad_bounds_correlated(g.channel!, g.n!,
                                   g.options?.block_size ?? 1)
            : ad_bounds(g.channel!, g.n!);
        actual = [...s.ns, ...s.values];
        break;
      }
      case "asym": {
        const a = asym_scaling_qfi(g.channel!);
        actual = [a.exponent, a.coefficient];
        break;
      }
    }
    const deviation = g.values.length === actual.length
      ? Math.max(...g.values.map((v, i) => Math.abs(v - actual[i])))
      : Number.POSITIVE_INFINITY;
    entries.push({ name: g.name, expected: g.values, actual, deviation });
  }
  return {
    entries,
    maxDeviation: Math.max(...entries.map((e) => e.deviation)),
  };
}
