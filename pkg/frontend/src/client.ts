/**
 * HTTP client for the prediction service.
 *
 * The wire format is the service's only contract: five text channels per
 * field, nothing else. Captures are mapped to that shape here, so the
 * DOM element (and anything typed into it) never reaches serialization.
 */

import type { DomFieldCapture, PredictResponse, WireField, WirePrediction } from './types';

/** The service rejects larger requests outright, so batch below its cap. */
export const MAX_FIELDS_PER_BATCH = 256;

/** Reduce a capture to the five wire channels. */
export function toWireField(capture: DomFieldCapture): WireField {
  return {
    label: capture.label,
    name: capture.name,
    id: capture.id,
    control_type: capture.controlType,
    url: capture.url,
  };
}

/**
 * Predict classes for the captured fields via POST /v1/predict.
 *
 * Requests over the batch cap are split and sent sequentially (one request
 * in flight at a time); predictions are merged back with `field_index`
 * rewritten to the caller's capture order. Any non-OK response rejects.
 */
export async function predictFields(
  captures: readonly DomFieldCapture[],
  origin: string,
  fetchImpl: typeof fetch = fetch,
): Promise<WirePrediction[]> {
  if (captures.length === 0) {
    return [];
  }
  const endpoint = `${origin.replace(/\/+$/, '')}/v1/predict`;
  const merged: WirePrediction[] = [];
  for (let offset = 0; offset < captures.length; offset += MAX_FIELDS_PER_BATCH) {
    const batch = captures.slice(offset, offset + MAX_FIELDS_PER_BATCH);
    const response = await fetchImpl(endpoint, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ fields: batch.map(toWireField) }),
    });
    if (!response.ok) {
      throw new Error(`prediction request failed: HTTP ${response.status}`);
    }
    const payload = (await response.json()) as PredictResponse;
    if (!Array.isArray(payload.predictions) || payload.predictions.length !== batch.length) {
      throw new Error('prediction response does not match the request batch');
    }
    for (const prediction of payload.predictions) {
      merged.push({ ...prediction, field_index: offset + prediction.field_index });
    }
  }
  return merged;
}
