import { afterEach, describe, expect, it, vi } from 'vitest';
import { CONFIDENCE_ATTR, LABEL_ATTR, annotate } from '../src/annotate';
import { scanPage } from '../src/scan';
import type { WirePrediction } from '../src/types';

const URL_OK = 'https://page.test/form';

function captures(html: string) {
  const doc = new DOMParser().parseFromString(html, 'text/html');
  return scanPage(doc, URL_OK);
}

function prediction(overrides: Partial<WirePrediction>): WirePrediction {
  return { field_index: 0, class_name: 'email', confidence: 0.9375, source: 'forest', ...overrides };
}

afterEach(() => {
  vi.restoreAllMocks();
});

describe('annotate', () => {
  it('stamps class and confidence onto the matched elements', () => {
    const caps = captures('<input name="a"><input name="b">');
    const n = annotate(caps, [
      prediction({ field_index: 0 }),
      prediction({ field_index: 1, class_name: 'password', confidence: 1, source: 'rules' }),
    ]);
    expect(n).toBe(2);
    expect(caps[0]?.element.getAttribute(LABEL_ATTR)).toBe('email');
    expect(caps[0]?.element.getAttribute(CONFIDENCE_ATTR)).toBe('0.9375');
    expect(caps[1]?.element.getAttribute(LABEL_ATTR)).toBe('password');
    expect(caps[1]?.element.getAttribute(CONFIDENCE_ATTR)).toBe('1');
  });

  it('ignores predictions whose index matches no capture', () => {
    const caps = captures('<input name="a">');
    const n = annotate(caps, [prediction({ field_index: 0 }), prediction({ field_index: 7 })]);
    expect(n).toBe(1);
  });

  it('leaves element values untouched', () => {
    const caps = captures('<input name="a">');
    const input = caps[0]?.element as HTMLInputElement;
    input.value = 'typed by the user';
    annotate(caps, [prediction({ field_index: 0 })]);
    expect(input.value).toBe('typed by the user');
    expect(input.getAttribute('value')).toBeNull();
  });

  it('stays quiet unless debug is requested', () => {
    const table = vi.spyOn(console, 'table').mockImplementation(() => {});
    const caps = captures('<input name="a">');
    annotate(caps, [prediction({ field_index: 0 })]);
    expect(table).not.toHaveBeenCalled();
    annotate(caps, [prediction({ field_index: 0 })], true);
    expect(table).toHaveBeenCalledTimes(1);
  });
});
