/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_routeview_free: (a: number, b: number) => void;
export const contact_distance_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const coverage_curve: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: bigint) => [number, number, number, number];
export const route_trace: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
export const routeview_latency_ms: (a: number) => number;
export const routeview_path: (a: number) => [number, number];
export const routeview_relays: (a: number) => [number, number];
export const routeview_satellites: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
