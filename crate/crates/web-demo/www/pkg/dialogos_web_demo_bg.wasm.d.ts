/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_forum_free: (a: number, b: number) => void;
export const forum_grid: (a: number, b: number) => [number, number];
export const forum_menu: (a: number, b: number, c: number, d: number) => [number, number];
export const forum_messages: (a: number) => [number, number];
export const forum_new: () => number;
export const forum_post: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number];
export const match_peers: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
