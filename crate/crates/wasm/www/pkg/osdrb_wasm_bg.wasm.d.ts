/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_swedemo_free: (a: number, b: number) => void;
export const initial_spectrum: (a: number, b: number) => [number, number, number, number];
export const retraction_lipschitz: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
export const swedemo_advance: (a: number, b: number) => [number, number];
export const swedemo_drift: (a: number) => [number, number];
export const swedemo_error: (a: number) => number;
export const swedemo_grid: (a: number) => [number, number];
export const swedemo_max_manifold_defect: (a: number) => number;
export const swedemo_n_params: (a: number) => number;
export const swedemo_new: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const swedemo_reduced_height: (a: number, b: number) => [number, number];
export const swedemo_reference_height: (a: number, b: number) => [number, number];
export const swedemo_time: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
