/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_linkresult_free: (a: number, b: number) => void;
export const aMagnitudeMap: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
export const linkresult_ber: (a: number) => number;
export const linkresult_bw99_ghz: (a: number) => number;
export const linkresult_distance_km: (a: number) => number;
export const linkresult_erased: (a: number) => number;
export const linkresult_points: (a: number) => [number, number];
export const linkresult_ptx_dbm: (a: number) => number;
export const simulateLink: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const slotWaveform: (a: number, b: number, c: number) => [number, number, number, number];
export const normalizedDistance: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
