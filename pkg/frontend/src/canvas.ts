/** Pure pixel pipeline behind the canvas: derive the committed-layer
 * color mask once per stack change, then re-blend locally as the
 * opacity slider moves (instant feedback, no server round trip).
 */

import { blendRgbaInto } from "./blend.js";

/** Recover the composite color mask from a full-opacity server blend.
 *
 * At opacity 1 a covered pixel displays its pure label color and an
 * uncovered pixel displays the frame. Where the two images differ the
 * pixel is covered and the blend value IS the mask color. Where they
 * agree the pixel either is uncovered or carries a mask color equal to
 * the frame color; in that case blending is the identity at every
 * opacity, so treating it as uncovered renders identically.
 */
export function maskFromFullBlend(
  frameRgba: Uint8ClampedArray,
  fullBlendRgba: Uint8ClampedArray,
): Uint8ClampedArray<ArrayBuffer> {
  if (frameRgba.length !== fullBlendRgba.length || frameRgba.length % 4 !== 0) {
    throw new RangeError("RGBA buffers must share a length divisible by 4");
  }
  const mask = new Uint8ClampedArray(frameRgba.length);
  for (let i = 0; i < frameRgba.length; i += 4) {
    const covered =
      frameRgba[i] !== fullBlendRgba[i] ||
      frameRgba[i + 1] !== fullBlendRgba[i + 1] ||
      frameRgba[i + 2] !== fullBlendRgba[i + 2];
    if (covered) {
      mask[i] = fullBlendRgba[i]!;
      mask[i + 1] = fullBlendRgba[i + 1]!;
      mask[i + 2] = fullBlendRgba[i + 2]!;
    }
    mask[i + 3] = 255;
  }
  return mask;
}

/** Compose the displayed image: frame, optionally overlaid with the
 * committed mask at the given opacity. Returns a fresh RGBA buffer of
 * the frame's size. */
export function renderView(
  frameRgba: Uint8ClampedArray,
  maskRgba: Uint8ClampedArray | null,
  opacity: number,
): Uint8ClampedArray<ArrayBuffer> {
  const out = new Uint8ClampedArray(frameRgba.length);
  blendRgbaInto(out, frameRgba, opacity === 0 ? null : maskRgba, opacity);
  return out;
}
