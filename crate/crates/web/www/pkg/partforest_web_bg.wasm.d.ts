/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_detector_free: (a: number, b: number) => void;
export const __wbg_detectview_free: (a: number, b: number) => void;
export const detector_detect: (a: number, b: number, c: bigint) => [number, number, number];
export const detector_new: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
export const detectview_info: (a: number) => [number, number];
export const detectview_rgba: (a: number) => [number, number];
export const dt_1d: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const gp_curve: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
