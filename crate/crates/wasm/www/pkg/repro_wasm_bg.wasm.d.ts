/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const binomial_explorer: (a: number, b: number, c: number) => [number, number, number, number];
export const mixture_sample: (a: number, b: number, c: bigint) => [number, number, number, number];
export const mixture_tau_set: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: bigint) => [number, number, number, number];
export const uniform_intervals: (a: number, b: number, c: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_start: () => void;
