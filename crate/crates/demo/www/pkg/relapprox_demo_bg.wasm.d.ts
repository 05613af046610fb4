/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const chain_json: (a: number, b: number, c: number) => [number, number];
export const chernoff_json: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number];
export const halfplane_json: (a: number, b: number, c: number, d: number, e: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
