/* tslint:disable */
/* eslint-disable */

/**
 * Exact next-state ellipse for noise-free data.
 */
export function noisefree_set(data_json: string, l: number, x: Float64Array, u: Float64Array): string;

/**
 * Minimal noise level over an ascending grid of gain bounds.
 */
export function tradeoff(data_json: string, grid: Float64Array): string;

/**
 * Sampled inner union of next-state ellipses under bounded noise.
 */
export function union_set(data_json: string, l: number, alpha: number, x: Float64Array, u: Float64Array, samples: number, seed: bigint): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly noisefree_set: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number];
    readonly tradeoff: (a: number, b: number, c: number, d: number) => [number, number];
    readonly union_set: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: bigint) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
