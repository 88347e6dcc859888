/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demo_free: (a: number, b: number) => void;
export const demo_edges: (a: number) => [number, number];
export const demo_new: (a: number, b: number, c: number, d: bigint) => [number, number, number];
export const demo_next_cue: (a: number, b: number) => [number, number, number, number];
export const demo_node_count: (a: number) => number;
export const demo_occupancy: (a: number) => [number, number];
export const demo_recall_all: (a: number) => [number, number, number, number];
export const demo_retrieve: (a: number, b: number, c: number) => [number, number, number, number];
export const demo_store: (a: number, b: number, c: number) => [number, number, number, number];
export const demo_stored_count: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_start: () => void;
