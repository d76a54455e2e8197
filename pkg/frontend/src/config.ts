/**
 * Service-origin configuration.
 *
 * The prediction service's origin is the one user-facing setting. It is
 * read from extension sync storage when available, from localStorage as a
 * fallback (plain-page and test contexts), and defaults to a local
 * development service otherwise.
 */

/** Origin used when nothing valid is configured. */
export const DEFAULT_ORIGIN = 'http://127.0.0.1:8080';

/** Storage key for the configured origin, same in both storage backends. */
export const ORIGIN_STORAGE_KEY = 'fieldsenseServiceOrigin';

interface SyncStorageArea {
  get(keys: string): Promise<Record<string, unknown>>;
}

/** True when `value` is an absolute http(s) URL usable as a service origin. */
export function isValidOrigin(value: unknown): value is string {
  if (typeof value !== 'string' || !value) {
    return false;
  }
  try {
    const url = new URL(value);
    return url.protocol === 'http:' || url.protocol === 'https:';
  } catch {
    return false;
  }
}

function chromeSyncStorage(): SyncStorageArea | null {
  const chrome = (globalThis as { chrome?: { storage?: { sync?: SyncStorageArea } } }).chrome;
  return chrome?.storage?.sync ?? null;
}

function localStorageValue(): unknown {
  try {
    return globalThis.localStorage?.getItem(ORIGIN_STORAGE_KEY);
  } catch {
    return null; // storage access can be denied wholesale; treat as unset
  }
}

/**
 * Resolve the configured service origin.
 *
 * Precedence: extension sync storage, then localStorage, then the default.
 * Invalid or unreadable stored values fall through to the next source.
 * Trailing slashes are stripped so callers can append paths directly.
 */
export async function getServiceOrigin(): Promise<string> {
  const candidates: unknown[] = [];
  const sync = chromeSyncStorage();
  if (sync) {
    try {
      const stored = await sync.get(ORIGIN_STORAGE_KEY);
      candidates.push(stored?.[ORIGIN_STORAGE_KEY]);
    } catch {
      // extension storage can fail during shutdown; fall through
    }
  }
  candidates.push(localStorageValue());
  for (const candidate of candidates) {
    if (isValidOrigin(candidate)) {
      return candidate.replace(/\/+$/, '');
    }
  }
  return DEFAULT_ORIGIN;
}
