/* tslint:disable */
/* eslint-disable */

export function bonding_curve(supply: number, price: number, weight: number, total_deposit: number, steps: number): Float64Array;

/**
 * JSON-encoded [`BuyQuote`].
 */
export function buy_quote(supply: number, price: number, weight: number, deposit: number): string;

/**
 * JSON-encoded [`Sweep`]. The seed is a `u32` so JavaScript numbers pass
 * through unchanged.
 */
export function weight_sweep(seed: number, bots: number, hours: number, weights: Float64Array): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly bonding_curve: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly buy_quote: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly weight_sweep: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
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
