/**
 * Wire types for the corpus service JSON API.
 *
 * Every field mirrors the server response verbatim; the UI never derives
 * numbers of its own from these shapes, it only lays them out.
 */
export {};
