/* tslint:disable */
/* eslint-disable */

/**
 * A one-sided range projected on its first two coordinates.
 */
export class RangeView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Whether the walker was stopped at a guard cut-point.
     */
    readonly censored: boolean;
    /**
     * Exact cut-points as interleaved `x, y`.
     */
    readonly cuts: Int32Array;
    /**
     * Path positions as interleaved `x, y`.
     */
    readonly path: Int32Array;
    /**
     * Walker positions as interleaved `x, y`; empty unless requested.
     */
    readonly walk: Int32Array;
}

/**
 * The range of `steps` walk steps in `Z^dim`, its exact cut-points and,
 * when `walk_steps > 0`, a walker of that length started at the origin.
 */
export function rangeView(dim: number, steps: number, seed: number, walk_steps: number, weighted: boolean): RangeView;

/**
 * Exact return probabilities at even times on one environment.
 */
export function returnCurve(dim: number, n_max: number, seed: number, weighted: boolean): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_rangeview_free: (a: number, b: number) => void;
    readonly rangeView: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly rangeview_censored: (a: number) => number;
    readonly rangeview_cuts: (a: number) => [number, number];
    readonly rangeview_path: (a: number) => [number, number];
    readonly rangeview_walk: (a: number) => [number, number];
    readonly returnCurve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
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
