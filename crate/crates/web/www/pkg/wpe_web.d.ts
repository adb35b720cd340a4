/* tslint:disable */
/* eslint-disable */

/**
 * A sampled trajectory with its behavior class.
 */
export class Run {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    positions(): Float64Array;
    times(): Float64Array;
    velocities(): Float64Array;
    readonly average_speed: number;
    /**
     * Behavior class, or `unclassified: <reason>`.
     */
    readonly class: string;
}

/**
 * Linear stability of the trough (k = 1) and peak (k = 0) rest states.
 */
export class StabilityView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    peak_eigenvalues(): Float64Array;
    /**
     * Four eigenvalues as `[re0, im0, re1, im1, ...]`.
     */
    trough_eigenvalues(): Float64Array;
    readonly omega_onset: number;
    readonly peak_verdict: string;
    readonly r_critical: number;
    readonly trough_verdict: string;
}

/**
 * Low-memory (A, B) map from the trough-rest start. Row-major class codes
 * (A outer, B inner): 0 stationary, 1 back-and-forth, 2 runaway,
 * 3 irregular, [`FAILED_CELL`] for a failed cell.
 */
export function lowmem_map(sigma: number, r: number, a_min: number, a_max: number, b_min: number, b_max: number, n: number, t_end: number): Uint8Array;

/**
 * Full-system run from `(x0, X0, X0, X0²)`; `x0 = NaN` means the trough
 * `π/B`.
 */
export function simulate(sigma: number, r: number, a: number, b: number, x0: number, v0: number, t_end: number): Run;

export function stability(sigma: number, r: number, a: number, b: number): StabilityView;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_run_free: (a: number, b: number) => void;
    readonly __wbg_stabilityview_free: (a: number, b: number) => void;
    readonly lowmem_map: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
    readonly run_average_speed: (a: number) => number;
    readonly run_class: (a: number) => [number, number];
    readonly run_positions: (a: number) => [number, number];
    readonly run_times: (a: number) => [number, number];
    readonly run_velocities: (a: number) => [number, number];
    readonly simulate: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
    readonly stability: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly stabilityview_omega_onset: (a: number) => number;
    readonly stabilityview_peak_eigenvalues: (a: number) => [number, number];
    readonly stabilityview_peak_verdict: (a: number) => [number, number];
    readonly stabilityview_r_critical: (a: number) => number;
    readonly stabilityview_trough_eigenvalues: (a: number) => [number, number];
    readonly stabilityview_trough_verdict: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
