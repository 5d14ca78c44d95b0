/* tslint:disable */
/* eslint-disable */

/**
 * Kneading data: cutting times, kneading map, itinerary prefix and the
 * closest precritical points.
 */
export function kneading_json(a: number, ell: number, k_count: number, horizon: number): string;

/**
 * Graph of `f^k` sampled on a grid, plus a cobweb orbit from the critical
 * point: `{ graph: [[x, y], ...], cobweb: [x0, x1, ...] }`.
 */
export function map_graph(a: number, ell: number, power: number, samples: number, cobweb_len: number): string;

/**
 * Principal nest levels with endpoints, return times and kinds, plus an
 * orbit prefix for drawing.
 */
export function nest_json(a: number, ell: number, depth: number): string;

/**
 * Resolve a preset parameter by certified bisection at the given order and
 * lock depth; returns the parameter and the realized cutting times.
 */
export function preset_json(name: string, ell: number, lock_past: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly kneading_json: (a: number, b: number, c: number, d: number) => [number, number];
    readonly map_graph: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly nest_json: (a: number, b: number, c: number) => [number, number];
    readonly preset_json: (a: number, b: number, c: number, d: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
