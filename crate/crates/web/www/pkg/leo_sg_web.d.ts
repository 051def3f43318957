/* tslint:disable */
/* eslint-disable */

/**
 * One antipodal gateway-to-gateway route over a fresh constellation.
 */
export class RouteView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * NaN when the destination was unreachable.
     */
    readonly latency_ms: number;
    /**
     * `[kind, lat°, lon°, radius_km, ...]`; kind 0 source, 1 satellite,
     * 2 relay gateway, 3 destination.
     */
    readonly path: Float64Array;
    /**
     * `[lat°, lon°, ...]` of every relay gateway.
     */
    readonly relays: Float64Array;
    /**
     * `[lat°, lon°, ...]` of every satellite.
     */
    readonly satellites: Float64Array;
}

/**
 * Contact-distance CCDF sampled at `points` slant ranges from nadir to the
 * horizon, flattened as `[d0, p0, d1, p1, ...]`.
 */
export function contact_distance_curve(count: number, altitude_km: number, poisson: boolean, points: number): Float64Array;

/**
 * Coverage for N = step, 2·step, ..., max_n, flattened as `[n, coverage, ...]`.
 */
export function coverage_curve(altitude_km: number, noise_dbw: number, nlos_constant_dbw: number, threshold_db: number, step: number, max_n: number, trials: number, seed: bigint): Float64Array;

export function route_trace(count: number, altitude_km: number, inter_satellite: boolean, relay_count: number, seed: bigint): RouteView;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_routeview_free: (a: number, b: number) => void;
    readonly contact_distance_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly coverage_curve: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: bigint) => [number, number, number, number];
    readonly route_trace: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
    readonly routeview_latency_ms: (a: number) => number;
    readonly routeview_path: (a: number) => [number, number];
    readonly routeview_relays: (a: number) => [number, number];
    readonly routeview_satellites: (a: number) => [number, number];
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
