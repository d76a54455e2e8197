/**
 * Content-script entry point: scan the page, ask the service, annotate.
 *
 * The script only ever adds data attributes; it never fills fields, never
 * reads values, and degrades to doing nothing when the service is
 * unreachable.
 */

import { annotate } from './annotate';
import { predictFields } from './client';
import { getServiceOrigin } from './config';
import { scanPage } from './scan';

let inFlight: Promise<number> | null = null;

async function run(doc: Document, origin?: string, fetchImpl: typeof fetch = fetch): Promise<number> {
  const pageUrl = doc.location?.href ?? '';
  const captures = scanPage(doc, pageUrl);
  if (captures.length === 0) {
    return 0;
  }
  const serviceOrigin = origin ?? (await getServiceOrigin());
  let predictions;
  try {
    predictions = await predictFields(captures, serviceOrigin, fetchImpl);
  } catch (err) {
    // one warning per scan; the page stays unannotated rather than half-done
    console.warn(`fieldsense: prediction request failed, page left unannotated (${String(err)})`);
    return 0;
  }
  return annotate(captures, predictions);
}

/**
 * Scan `doc`, fetch predictions, and annotate matched elements.
 *
 * Returns the number of elements annotated. Only one scan runs at a time:
 * calls made while one is in flight share its promise instead of issuing
 * duplicate requests. A network or HTTP failure resolves to 0 after a
 * single console warning.
 */
export function scanAndAnnotate(
  doc: Document,
  origin?: string,
  fetchImpl: typeof fetch = fetch,
): Promise<number> {
  if (inFlight) {
    return inFlight;
  }
  inFlight = run(doc, origin, fetchImpl).finally(() => {
    inFlight = null;
  });
  return inFlight;
}

/** Run a scan once the document is ready (immediately if it already is). */
export function registerContentScript(doc: Document = document): void {
  const kick = (): void => {
    void scanAndAnnotate(doc);
  };
  if (doc.readyState === 'loading') {
    doc.addEventListener('DOMContentLoaded', kick, { once: true });
  } else {
    kick();
  }
}
