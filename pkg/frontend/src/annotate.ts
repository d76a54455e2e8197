/**
 * Write predictions back onto the page as data attributes.
 *
 * Annotation is the client's entire write surface: it sets two data-*
 * attributes per field and never touches element values, so it can run on
 * any page without side effects on what the user typed.
 */

import type { DomFieldCapture, WirePrediction } from './types';

/** Attribute carrying the predicted class name. */
export const LABEL_ATTR = 'data-fieldsense-label';

/** Attribute carrying the prediction confidence. */
export const CONFIDENCE_ATTR = 'data-fieldsense-confidence';

/**
 * Annotate captured elements with their predictions.
 *
 * Each prediction is matched to a capture by `field_index`; indexes outside
 * the capture list are ignored. Returns the number of elements annotated.
 * With `debug` set, a summary table is logged to the console.
 */
export function annotate(
  captures: readonly DomFieldCapture[],
  predictions: readonly WirePrediction[],
  debug = false,
): number {
  let count = 0;
  const rows: Array<Record<string, string | number>> = [];
  for (const prediction of predictions) {
    const capture = captures[prediction.field_index];
    if (!capture) {
      continue;
    }
    capture.element.setAttribute(LABEL_ATTR, prediction.class_name);
    capture.element.setAttribute(CONFIDENCE_ATTR, String(prediction.confidence));
    count += 1;
    if (debug) {
      rows.push({
        index: prediction.field_index,
        name: capture.name,
        label: capture.label,
        class: prediction.class_name,
        confidence: prediction.confidence,
        source: prediction.source,
      });
    }
  }
  if (debug) {
    console.table(rows);
  }
  return count;
}
