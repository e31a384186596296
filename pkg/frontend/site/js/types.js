/** Shared shapes mirroring the annotation service's JSON schema. */
export {};
