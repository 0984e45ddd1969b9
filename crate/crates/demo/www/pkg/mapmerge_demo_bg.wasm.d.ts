/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_gridimage_free: (a: number, b: number) => void;
export const changeLabels: (a: number, b: number, c: number) => [number, number];
export const gridimage_contradictions: (a: number) => number;
export const gridimage_height: (a: number) => number;
export const gridimage_new: (a: number, b: number, c: number) => number;
export const gridimage_overlap: (a: number) => number;
export const gridimage_r: (a: number) => number;
export const gridimage_rgba: (a: number) => [number, number];
export const gridimage_width: (a: number) => number;
export const scoreSweep: (a: number, b: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
