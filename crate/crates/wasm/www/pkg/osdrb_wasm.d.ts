/* tslint:disable */
/* eslint-disable */

/**
 * Shallow-water run with the dynamical reduced basis, advanced in chunks.
 */
export class SweDemo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Advances both the reduced model and the full-order reference by `steps` steps.
     */
    advance(steps: number): void;
    /**
     * Hamiltonian drift after each `advance` call.
     */
    drift(): Float64Array;
    /**
     * Frobenius error of `U Z^T` against the reference.
     */
    error(): number;
    grid(): Float64Array;
    max_manifold_defect(): number;
    n_params(): number;
    /**
     * `method` is `rkmk-cay`, `rkmk-exp` or `tangent`; `two_k` the reduced dimension.
     */
    constructor(grid_points: number, samples_beta: number, two_k: number, method: string, dt: number);
    /**
     * Water height of parameter `j` from the reduced model.
     */
    reduced_height(j: number): Float64Array;
    /**
     * Water height of parameter `j` from the full-order reference.
     */
    reference_height(j: number): Float64Array;
    time(): number;
}

/**
 * Singular values (descending) of the complexified initial shallow-water states.
 */
export function initial_spectrum(grid_points: number, samples_beta: number): Float64Array;

/**
 * Largest ratio `||R_Q(V) - R_Q(W)|| / ||V - W||` over random horizontal pairs of size `scale`.
 */
export function retraction_lipschitz(two_m: number, k: number, scale: number, samples: number, seed: bigint): number;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_swedemo_free: (a: number, b: number) => void;
    readonly initial_spectrum: (a: number, b: number) => [number, number, number, number];
    readonly retraction_lipschitz: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
    readonly swedemo_advance: (a: number, b: number) => [number, number];
    readonly swedemo_drift: (a: number) => [number, number];
    readonly swedemo_error: (a: number) => number;
    readonly swedemo_grid: (a: number) => [number, number];
    readonly swedemo_max_manifold_defect: (a: number) => number;
    readonly swedemo_n_params: (a: number) => number;
    readonly swedemo_new: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly swedemo_reduced_height: (a: number, b: number) => [number, number];
    readonly swedemo_reference_height: (a: number, b: number) => [number, number];
    readonly swedemo_time: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
