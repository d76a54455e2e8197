/**
 * DOM-side form-field scanning.
 *
 * The inclusion rules and the label-resolution priority here must stay in
 * lockstep with the server-side HTML extractor; the conformance test diffs
 * both against the same golden fixture pages.
 */

import type { DomFieldCapture } from './types';

/** Input types that are never autofill targets. */
const EXCLUDED_INPUT_TYPES = new Set(['hidden', 'submit', 'button', 'reset', 'image']);

/** Unrecognized type attributes fall back to the text state, per the HTML spec. */
const KNOWN_INPUT_TYPES = new Set([
  'button', 'checkbox', 'color', 'date', 'datetime-local', 'email',
  'file', 'hidden', 'image', 'month', 'number', 'password', 'radio',
  'range', 'reset', 'search', 'submit', 'tel', 'text', 'time', 'url',
  'week',
]);

/** Elements whose text reads as part of the surrounding line of text. */
const INLINE_TEXT_TAGS = new Set([
  'a', 'abbr', 'b', 'code', 'em', 'font', 'i', 'mark', 'small', 'span',
  'strong', 'sub', 'sup', 'u',
]);

/** Subtrees whose text content is never human-visible label text. */
const NON_TEXT_TAGS = new Set(['script', 'style', 'template']);

function collapse(text: string): string {
  return text.split(/\s+/).filter(Boolean).join(' ');
}

/** Concatenated text of a subtree, skipping non-text tags and `exclude`. */
function collectText(root: Element, exclude: Element | null = null): string {
  const parts: string[] = [];
  const walk = (node: Node): void => {
    if (node.nodeType === Node.TEXT_NODE) {
      parts.push(node.nodeValue ?? '');
      return;
    }
    if (node.nodeType !== Node.ELEMENT_NODE) {
      return;
    }
    const el = node as Element;
    if (el === exclude || NON_TEXT_TAGS.has(el.tagName.toLowerCase())) {
      return;
    }
    for (const child of el.childNodes) {
      walk(child);
    }
  };
  for (const child of root.childNodes) {
    walk(child);
  }
  return collapse(parts.join(''));
}

/** Map id -> first `<label for=id>` in document order. */
function labelForMap(doc: Document): Map<string, Element> {
  const mapping = new Map<string, Element>();
  for (const label of doc.querySelectorAll('label[for]')) {
    const target = label.getAttribute('for') ?? '';
    if (target && !mapping.has(target)) {
      mapping.set(target, label);
    }
  }
  return mapping;
}

/** Text of the nearest preceding text/inline sibling, stopping at block elements. */
function precedingSiblingText(control: Element): string {
  let sibling = control.previousSibling;
  while (sibling) {
    if (sibling.nodeType === Node.TEXT_NODE) {
      const text = collapse(sibling.nodeValue ?? '');
      if (text) {
        return text;
      }
    } else if (sibling.nodeType === Node.ELEMENT_NODE) {
      const el = sibling as Element;
      const tag = el.tagName.toLowerCase();
      if (tag !== 'br' && !NON_TEXT_TAGS.has(tag)) {
        if (INLINE_TEXT_TAGS.has(tag) || tag === 'label') {
          const text = collectText(el);
          if (text) {
            return text;
          }
        } else {
          break; // block-level sibling: different visual line, stop looking
        }
      }
    }
    // comments and other node kinds are invisible: keep scanning
    sibling = sibling.previousSibling;
  }
  return '';
}

/**
 * Resolve the human-visible label for a control.
 *
 * Fixed priority: label[for] association, enclosing label (minus the
 * control's own text), aria-label, placeholder, nearest preceding inline
 * sibling text, then empty.
 */
export function resolveLabel(control: Element, labelFor: Map<string, Element>): string {
  const controlId = control.getAttribute('id') ?? '';
  const associated = controlId ? labelFor.get(controlId) : undefined;
  if (associated) {
    const text = collectText(associated);
    if (text) {
      return text;
    }
  }

  for (let ancestor = control.parentElement; ancestor; ancestor = ancestor.parentElement) {
    if (ancestor.tagName.toLowerCase() === 'label') {
      const text = collectText(ancestor, control);
      if (text) {
        return text;
      }
      break;
    }
  }

  for (const attr of ['aria-label', 'placeholder']) {
    const value = collapse(control.getAttribute(attr) ?? '');
    if (value) {
      return value;
    }
  }

  return precedingSiblingText(control);
}

/** Control type for an element, or null if it is not a fillable control. */
function controlType(el: Element): string | null {
  const tag = el.tagName.toLowerCase();
  if (tag === 'select') {
    return 'select';
  }
  if (tag === 'textarea') {
    return 'textarea';
  }
  if (tag !== 'input') {
    return null;
  }
  let itype = (el.getAttribute('type') ?? '').trim().toLowerCase();
  if (EXCLUDED_INPUT_TYPES.has(itype)) {
    return null;
  }
  if (!KNOWN_INPUT_TYPES.has(itype)) {
    itype = 'text';
  }
  return itype;
}

/**
 * Capture every fillable form control on the page, in document order.
 *
 * Captures carry only markup metadata (the five text channels); element
 * values are never read. Fields with no label, name, and id are dropped.
 */
export function scanPage(doc: Document, pageUrl: string): DomFieldCapture[] {
  new URL(pageUrl); // validation only: throws on a non-absolute page URL
  const labelFor = labelForMap(doc);
  const captures: DomFieldCapture[] = [];
  for (const el of doc.querySelectorAll('input, select, textarea')) {
    const ctype = controlType(el);
    if (ctype === null) {
      continue;
    }
    const capture: DomFieldCapture = {
      element: el,
      label: resolveLabel(el, labelFor),
      name: el.getAttribute('name') ?? '',
      id: el.getAttribute('id') ?? '',
      controlType: ctype,
      url: pageUrl, // stored verbatim, matching the server-side extractor
    };
    if (capture.label || capture.name || capture.id) {
      captures.push(capture);
    }
  }
  return captures;
}
