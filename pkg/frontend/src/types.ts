/** One fillable control captured from the live DOM.
 *
 * Deliberately mirrors the server's five text channels and nothing else:
 * there is no slot for the element's value, so user input cannot leak into
 * a capture even by accident. The element handle stays client-side for
 * annotation and is stripped before anything goes on the wire.
 */
export interface DomFieldCapture {
  element: Element;
  label: string;
  name: string;
  id: string;
  controlType: string;
  url: string;
}

/** Wire shape of one field in a POST /v1/predict request. */
export interface WireField {
  label: string;
  name: string;
  id: string;
  control_type: string;
  url: string;
}

/** One prediction entry from the service, aligned by field_index. */
export interface WirePrediction {
  field_index: number;
  class_name: string;
  confidence: number;
  source: string;
  scores?: Record<string, number> | null;
}

export interface PredictResponse {
  model_version: string;
  predictions: WirePrediction[];
}
