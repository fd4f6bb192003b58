/* tslint:disable */
/* eslint-disable */

/**
 * Derivation of the identity map on a planar cloud. Returns the points and,
 * for each point, the stage at which it is removed (`null` if never).
 */
export function derivation_stages(shape: string, n: number, seed: bigint, eps: number, cluster: boolean): string;

/**
 * Envelope `f_n` of a one-dimensional map on `[-1, 1]`, with its split
 * `g - h`. `kind` is `abs`, `square`, `zigzag` or `step`.
 */
export function envelope_curve(kind: string, n: number, points: number): string;

/**
 * Oscillation of the slices `{x : u(x) > sup u - t}` of a planar cloud for
 * `u = (cos angle, sin angle)` along the default depth schedule.
 */
export function slice_profile(shape: string, n: number, seed: bigint, angle: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly derivation_stages: (a: number, b: number, c: number, d: bigint, e: number, f: number) => [number, number, number, number];
    readonly envelope_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly slice_profile: (a: number, b: number, c: number, d: bigint, e: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
