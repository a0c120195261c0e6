/** Client-side overlay blending, bit-compatible with the server preview.
 *
 * A pixel is covered when its mask color is not pure black. Covered
 * channels become floor(opacity*mask + (1-opacity)*frame + 0.5); the
 * float64 expression is evaluated in exactly that order so the result
 * matches the server's preview byte for byte. Background pixels pass
 * through untouched.
 */

export type ByteArray = Uint8Array | Uint8ClampedArray;

/** Blend flat row-major RGB buffers (length 3 * pixel count). */
export function blendPreview(
  frame: ByteArray,
  mask: ByteArray,
  opacity: number,
): Uint8ClampedArray {
  if (!(opacity >= 0 && opacity <= 1)) {
    throw new RangeError(`opacity must be in [0, 1], got ${opacity}`);
  }
  if (frame.length !== mask.length) {
    throw new RangeError(
      `frame has ${frame.length} bytes but mask has ${mask.length}`,
    );
  }
  if (frame.length % 3 !== 0) {
    throw new RangeError(`RGB buffer length must be divisible by 3, got ${frame.length}`);
  }
  const out = Uint8ClampedArray.from(frame);
  const inv = 1 - opacity;
  for (let i = 0; i < frame.length; i += 3) {
    if (mask[i] === 0 && mask[i + 1] === 0 && mask[i + 2] === 0) {
      continue;
    }
    out[i] = Math.floor(opacity * mask[i]! + inv * frame[i]! + 0.5);
    out[i + 1] = Math.floor(opacity * mask[i + 1]! + inv * frame[i + 1]! + 0.5);
    out[i + 2] = Math.floor(opacity * mask[i + 2]! + inv * frame[i + 2]! + 0.5);
  }
  return out;
}

/** Same blend over RGBA canvas buffers; alpha is forced opaque. */
export function blendRgbaInto(
  out: Uint8ClampedArray,
  frame: ByteArray,
  mask: ByteArray | null,
  opacity: number,
): void {
  if (out.length !== frame.length || out.length % 4 !== 0) {
    throw new RangeError("RGBA buffers must share a length divisible by 4");
  }
  if (mask !== null && mask.length !== frame.length) {
    throw new RangeError("mask RGBA buffer length must match the frame");
  }
  if (!(opacity >= 0 && opacity <= 1)) {
    throw new RangeError(`opacity must be in [0, 1], got ${opacity}`);
  }
  const inv = 1 - opacity;
  for (let i = 0; i < frame.length; i += 4) {
    const covered =
      mask !== null &&
      (mask[i] !== 0 || mask[i + 1] !== 0 || mask[i + 2] !== 0);
    if (covered) {
      out[i] = Math.floor(opacity * mask[i]! + inv * frame[i]! + 0.5);
      out[i + 1] = Math.floor(opacity * mask[i + 1]! + inv * frame[i + 1]! + 0.5);
      out[i + 2] = Math.floor(opacity * mask[i + 2]! + inv * frame[i + 2]! + 0.5);
    } else {
      out[i] = frame[i]!;
      out[i + 1] = frame[i + 1]!;
      out[i + 2] = frame[i + 2]!;
    }
    out[i + 3] = 255;
  }
}
