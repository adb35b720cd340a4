/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_run_free: (a: number, b: number) => void;
export const __wbg_stabilityview_free: (a: number, b: number) => void;
export const lowmem_map: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
export const run_average_speed: (a: number) => number;
export const run_class: (a: number) => [number, number];
export const run_positions: (a: number) => [number, number];
export const run_times: (a: number) => [number, number];
export const run_velocities: (a: number) => [number, number];
export const simulate: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
export const stability: (a: number, b: number, c: number, d: number) => [number, number, number];
export const stabilityview_omega_onset: (a: number) => number;
export const stabilityview_peak_eigenvalues: (a: number) => [number, number];
export const stabilityview_peak_verdict: (a: number) => [number, number];
export const stabilityview_r_critical: (a: number) => number;
export const stabilityview_trough_eigenvalues: (a: number) => [number, number];
export const stabilityview_trough_verdict: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
