/* tslint:disable */
/* eslint-disable */

export class DetectView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * JSON with frame size, ground truth and both detection records.
     */
    info(): string;
    rgba(): Uint8Array;
}

export class Detector {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * RGBA pixels of the rendered frame; call [`Detector::info`] after.
     */
    detect(phase: number, seed: bigint): DetectView;
    /**
     * Trains a detector on `n_train` synthetic frames.
     */
    constructor(n_train: number, negatives_per_part: number, actor: string, seed: bigint);
}

export function dt_1d(src: Float64Array, lin: number, quad: number, shift: number): Float64Array;

export function gp_curve(xs: Float64Array, ys: Float64Array, grid: Float64Array): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_detector_free: (a: number, b: number) => void;
    readonly __wbg_detectview_free: (a: number, b: number) => void;
    readonly detector_detect: (a: number, b: number, c: bigint) => [number, number, number];
    readonly detector_new: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
    readonly detectview_info: (a: number) => [number, number];
    readonly detectview_rgba: (a: number) => [number, number];
    readonly dt_1d: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly gp_curve: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
