/* tslint:disable */
/* eslint-disable */

/**
 * Outcome of one simulated frame.
 */
export class LinkResult {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly ber: number;
    readonly bw99_ghz: number;
    readonly distance_km: number;
    readonly erased: number;
    /**
     * Received points as `[re, im]` pairs, four per symbol in the order
     * `b1(l1), b2(l1), b1(l2), b2(l2)`; erased points are NaN.
     */
    readonly points: Float64Array;
    readonly ptx_dbm: number;
}

export function aMagnitudeMap(byte: number, re_min: number, re_max: number, im_min: number, im_max: number, nx: number, ny: number): Float64Array;

/**
 * Normalized distance of `km` of fiber in the demo normalization.
 */
export function normalizedDistance(km: number): number;

export function simulateLink(n_symbols: number, n_spans: number, osnr_db: number, noise_figure_db: number, ase: boolean, seed: number): LinkResult;

export function slotWaveform(byte: number, z: number, n: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_linkresult_free: (a: number, b: number) => void;
    readonly aMagnitudeMap: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly linkresult_ber: (a: number) => number;
    readonly linkresult_bw99_ghz: (a: number) => number;
    readonly linkresult_distance_km: (a: number) => number;
    readonly linkresult_erased: (a: number) => number;
    readonly linkresult_points: (a: number) => [number, number];
    readonly linkresult_ptx_dbm: (a: number) => number;
    readonly simulateLink: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly slotWaveform: (a: number, b: number, c: number) => [number, number, number, number];
    readonly normalizedDistance: (a: number) => number;
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
