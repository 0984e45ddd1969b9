/* tslint:disable */
/* eslint-disable */

export class GridImage {
    free(): void;
    [Symbol.dispose](): void;
    constructor(angle_deg: number, dx: number, dy: number);
    rgba(): Uint8Array;
    readonly contradictions: number;
    readonly height: number;
    readonly overlap: number;
    readonly r: number;
    readonly width: number;
}

/**
 * JSON [`ChangeView`] for a merge error of `angle_deg` about the crossing plus `(dx, dy)`.
 */
export function changeLabels(angle_deg: number, dx: number, dy: number): string;

/**
 * JSON list of [`SweepPoint`].
 */
export function scoreSweep(max_deg: number, step_deg: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_gridimage_free: (a: number, b: number) => void;
    readonly changeLabels: (a: number, b: number, c: number) => [number, number];
    readonly gridimage_contradictions: (a: number) => number;
    readonly gridimage_height: (a: number) => number;
    readonly gridimage_new: (a: number, b: number, c: number) => number;
    readonly gridimage_overlap: (a: number) => number;
    readonly gridimage_r: (a: number) => number;
    readonly gridimage_rgba: (a: number) => [number, number];
    readonly gridimage_width: (a: number) => number;
    readonly scoreSweep: (a: number, b: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
