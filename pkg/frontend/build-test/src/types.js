/**
 * Wire types mirroring the gateway's JSON encodings (snake_case).
 */
export {};
