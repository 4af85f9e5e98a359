/**
 * Structural similarity between two images, plus luminance helpers.
 *
 * SSIM uses the standard constants (K1=0.01, K2=0.03, L=255) over a uniform
 * sliding window on the luma channel. A uniform window instead of the
 * Gaussian one keeps the implementation small; for the near-identical frame
 * pairs this package compares, the two weightings agree far beyond the
 * thresholds in use.
 */
import { Image } from "./ppm";

const LUMA_R = 0.2126;
const LUMA_G = 0.7152;
const LUMA_B = 0.0722;

// Per-pixel luma on the 0..255 scale SSIM's constants assume.
export const toLuma = (img: Image): Float64Array => {
  const out = new Float64Array(img.width * img.height);
  for (let i = 0; i < out.length; i++) {
    const j = i * 3;
    out[i] = 255 * (LUMA_R * img.data[j] + LUMA_G * img.data[j + 1] + LUMA_B * img.data[j + 2]);
  }
  return out;
};

export const meanLuma = (img: Image): number => {
  const luma = toLuma(img);
  let sum = 0;
  for (let i = 0; i < luma.length; i++) {
    sum += luma[i];
  }
  return sum / luma.length;
};

export const ssim = (a: Image, b: Image, windowSize = 8): number => {
  if (a.width !== b.width || a.height !== b.height) {
    throw new Error("ssim: image sizes differ");
  }
  if (a.width < windowSize || a.height < windowSize) {
    throw new Error("ssim: image smaller than window");
  }
  const la = toLuma(a);
  const lb = toLuma(b);
  const w = a.width;
  const n = windowSize * windowSize;
  const c1 = (0.01 * 255) ** 2;
  const c2 = (0.03 * 255) ** 2;

  let total = 0;
  let windows = 0;
  for (let y = 0; y + windowSize <= a.height; y++) {
    for (let x = 0; x + windowSize <= a.width; x++) {
      let sa = 0;
      let sb = 0;
      let saa = 0;
      let sbb = 0;
      let sab = 0;
      for (let dy = 0; dy < windowSize; dy++) {
        let i = (y + dy) * w + x;
        for (let dx = 0; dx < windowSize; dx++, i++) {
          const va = la[i];
          const vb = lb[i];
          sa += va;
          sb += vb;
          saa += va * va;
          sbb += vb * vb;
          sab += va * vb;
        }
      }
      const ma = sa / n;
      const mb = sb / n;
      const varA = saa / n - ma * ma;
      const varB = sbb / n - mb * mb;
      const cov = sab / n - ma * mb;
      const num = (2 * ma * mb + c1) * (2 * cov + c2);
      const den = (ma * ma + mb * mb + c1) * (varA + varB + c2);
      total += num / den;
      windows++;
    }
  }
  return total / windows;
};
