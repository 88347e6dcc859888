/* tslint:disable */
/* eslint-disable */

export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Graph edges as `[u0, v0, u1, v1, ...]`.
     */
    edges(): Uint32Array;
    /**
     * ER network on `n` nodes with edge probability `p` and table bound `k`.
     */
    constructor(n: number, p: number, k: number, seed: bigint);
    /**
     * Cue of the next sample in the seeded stream.
     */
    next_cue(s: number): Uint32Array;
    node_count(): number;
    /**
     * Distinct outputs held by every node's table.
     */
    occupancy(): Uint32Array;
    /**
     * Retrieves every stored sample with its full cue; returns `[P, C]`.
     */
    recall_all(): Float64Array;
    /**
     * Retrieves from a cue; when the cue matches a stored sample the result
     * also carries its accuracy and completeness.
     */
    retrieve(nodes: Uint32Array): string;
    /**
     * Stores a sample; returns `{edges, nodes, quality}` as JSON.
     */
    store(nodes: Uint32Array): string;
    stored_count(): number;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly demo_edges: (a: number) => [number, number];
    readonly demo_new: (a: number, b: number, c: number, d: bigint) => [number, number, number];
    readonly demo_next_cue: (a: number, b: number) => [number, number, number, number];
    readonly demo_node_count: (a: number) => number;
    readonly demo_occupancy: (a: number) => [number, number];
    readonly demo_recall_all: (a: number) => [number, number, number, number];
    readonly demo_retrieve: (a: number, b: number, c: number) => [number, number, number, number];
    readonly demo_store: (a: number, b: number, c: number) => [number, number, number, number];
    readonly demo_stored_count: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
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
