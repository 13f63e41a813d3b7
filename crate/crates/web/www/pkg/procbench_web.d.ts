/* tslint:disable */
/* eslint-disable */

/**
 * Trains a small LSTM on one held-out fold and scores a simulated log.
 */
export function lstmFold(model: number, traces: number, hidden: number, epochs: number, seed: number): string;

/**
 * Fits the Markov baseline on one held-out fold and scores a simulated log.
 */
export function markovFold(model: number, traces: number, order: number, seed: number): string;

/**
 * Variant histogram of a play-out, most frequent first.
 */
export function playoutVariants(model: number, traces: number, seed: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly lstmFold: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly markovFold: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly playoutVariants: (a: number, b: number, c: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
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
