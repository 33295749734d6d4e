/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_rangeview_free: (a: number, b: number) => void;
export const rangeView: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const rangeview_censored: (a: number) => number;
export const rangeview_cuts: (a: number) => [number, number];
export const rangeview_path: (a: number) => [number, number];
export const rangeview_walk: (a: number) => [number, number];
export const returnCurve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
