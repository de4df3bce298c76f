/** Service base URL: ?service=... beats localStorage beats the default. */

const STORAGE_KEY = "newsrisk.service";
const DEFAULT_URL = "http://127.0.0.1:8100";

export function serviceBaseUrl(
  search: string = window.location.search,
  storage: Pick<Storage, "getItem" | "setItem"> | null = window.localStorage,
): string {
  const fromQuery = new URLSearchParams(search).get("service");
  if (fromQuery) {
    storage?.setItem(STORAGE_KEY, fromQuery);
    return fromQuery;
  }
  return storage?.getItem(STORAGE_KEY) ?? DEFAULT_URL;
}
