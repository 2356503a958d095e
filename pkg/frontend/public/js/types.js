// Wire types mirroring the advice service's JSON payloads, field for field.
export {};
