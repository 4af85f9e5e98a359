/**
 * Minimal binary PPM (P6, maxval 255) image support.
 *
 * Pixels live in a Float64Array as linear-light RGB in 0..1; encoding applies
 * gamma 1/2.2 and rounds to bytes, decoding reverses it. PPM keeps the frame
 * output dependency-free and trivially diffable.
 */

export class Image {
  public width: number;
  public height: number;
  public data: Float64Array; // rgb rgb ..., row-major from top-left

  constructor(width: number, height: number, data?: Float64Array) {
    if (!Number.isInteger(width) || !Number.isInteger(height) || width <= 0 || height <= 0) {
      throw new Error(`invalid image size ${width}x${height}`);
    }
    this.width = width;
    this.height = height;
    this.data = data ?? new Float64Array(width * height * 3);
    if (this.data.length !== width * height * 3) {
      throw new Error("image data length does not match size");
    }
  }

  setPixel(x: number, y: number, r: number, g: number, b: number): void {
    const i = (y * this.width + x) * 3;
    this.data[i] = r;
    this.data[i + 1] = g;
    this.data[i + 2] = b;
  }

  getPixel(x: number, y: number): [number, number, number] {
    const i = (y * this.width + x) * 3;
    return [this.data[i], this.data[i + 1], this.data[i + 2]];
  }
}

const GAMMA = 2.2;

const toByte = (v: number): number => {
  const clamped = Math.min(1, Math.max(0, v));
  return Math.round(Math.pow(clamped, 1 / GAMMA) * 255);
};

export const encodePPM = (img: Image): Buffer => {
  const header = Buffer.from(`P6\n${img.width} ${img.height}\n255\n`, "ascii");
  const body = Buffer.allocUnsafe(img.width * img.height * 3);
  for (let i = 0; i < img.data.length; i++) {
    body[i] = toByte(img.data[i]);
  }
  return Buffer.concat([header, body]);
};

export const decodePPM = (buf: Buffer): Image => {
  // header: magic, width, height, maxval separated by whitespace/comments
  let pos = 0;
  const token = (): string => {
    while (pos < buf.length) {
      const c = buf[pos];
      if (c === 0x23) {
        // '#' comment runs to end of line
        while (pos < buf.length && buf[pos] !== 0x0a) pos++;
      } else if (c === 0x20 || c === 0x09 || c === 0x0a || c === 0x0d) {
        pos++;
      } else {
        break;
      }
    }
    const start = pos;
    while (pos < buf.length && ![0x20, 0x09, 0x0a, 0x0d].includes(buf[pos])) pos++;
    return buf.subarray(start, pos).toString("ascii");
  };
  const magic = token();
  if (magic !== "P6") {
    throw new Error(`not a binary PPM file (magic "${magic}")`);
  }
  const width = parseInt(token(), 10);
  const height = parseInt(token(), 10);
  const maxval = parseInt(token(), 10);
  if (!(width > 0) || !(height > 0) || maxval !== 255) {
    throw new Error("unsupported PPM header");
  }
  pos++; // single whitespace after maxval
  const need = width * height * 3;
  if (buf.length - pos < need) {
    throw new Error("PPM pixel data truncated");
  }
  const img = new Image(width, height);
  for (let i = 0; i < need; i++) {
    img.data[i] = Math.pow(buf[pos + i] / 255, GAMMA);
  }
  return img;
};
