/* tslint:disable */
/* eslint-disable */

/**
 * Mean minimum distance vs store size for each qubit count.
 */
export function distance_curves(n_values: Uint32Array, k_max: number, trials: number, seed: bigint): string;

/**
 * Cost traces for one fresh target: cold start, warm start and estimator.
 */
export function transfer_traces(n: number, k_a: number, learning_rate: number, seed: bigint): string;

/**
 * Per-node iterations of tree flooding vs independent cold starts.
 */
export function tree_flooding(n: number, targets: number, depth: number, branching: number, seed: bigint): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly distance_curves: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
    readonly transfer_traces: (a: number, b: number, c: number, d: bigint) => [number, number, number, number];
    readonly tree_flooding: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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
