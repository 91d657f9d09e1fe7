/* tslint:disable */
/* eslint-disable */

/**
 * Binomial(r, theta) confidence set for an observed count, with the acceptance band.
 */
export function binomial_explorer(r: number, y: number, alpha: number): string;

/**
 * Draw n points from a reference normal mixture with tau components.
 */
export function mixture_sample(tau: number, n: number, seed: bigint): string;

/**
 * Confidence set for the number of mixture components.
 */
export function mixture_tau_set(y: Float64Array, alpha: number, lambda: number, tau_max: number, v_size: number, vc_size: number, seed: bigint): string;

/**
 * Uniform location intervals: Irwin-Hall mean, order-statistic box and likelihood ratio.
 */
export function uniform_intervals(y: Float64Array, alpha: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly binomial_explorer: (a: number, b: number, c: number) => [number, number, number, number];
    readonly mixture_sample: (a: number, b: number, c: bigint) => [number, number, number, number];
    readonly mixture_tau_set: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: bigint) => [number, number, number, number];
    readonly uniform_intervals: (a: number, b: number, c: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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
