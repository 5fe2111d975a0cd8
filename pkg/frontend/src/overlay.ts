// Geometry for drawing over server-rendered crops. Crops arrive in image
// coordinates; overlays must land on display pixels. No DOM here so the
// math stays unit-testable.

import { BoxTuple, CtrScale } from "./api.js";

export interface DisplayBox {
  left: number;
  top: number;
  width: number;
  height: number;
}

export interface CropMapping {
  toDisplay(x: number, y: number): [number, number];
  boxToDisplay(box: BoxTuple): DisplayBox;
}

export function makeMapping(crop: BoxTuple, dispW: number, dispH: number): CropMapping {
  const [cx0, cy0, cx1, cy1] = crop;
  const cropW = Math.max(cx1 - cx0, 1);
  const cropH = Math.max(cy1 - cy0, 1);
  const sx = dispW / cropW;
  const sy = dispH / cropH;
  return {
    toDisplay(x: number, y: number): [number, number] {
      return [(x - cx0) * sx, (y - cy0) * sy];
    },
    boxToDisplay(box: BoxTuple): DisplayBox {
      const [x0, y0] = this.toDisplay(box[0], box[1]);
      const [x1, y1] = this.toDisplay(box[2], box[3]);
      return { left: x0, top: y0, width: x1 - x0, height: y1 - y0 };
    },
  };
}

export interface ScaleLine {
  kind: string;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  label: string;
}

// Three measured segments (right heart reach, left heart reach, inner
// thoracic diameter) mapped onto the displayed crop, each labelled with
// its pixel length.
export function ctrScaleLines(scale: CtrScale, mapping: CropMapping): ScaleLine[] {
  return scale.segments.map((seg) => {
    const [x1, y1] = mapping.toDisplay(seg.x0, seg.y0);
    const [x2, y2] = mapping.toDisplay(seg.x1, seg.y1);
    return {
      kind: seg.kind,
      x1,
      y1,
      x2,
      y2,
      label: `${seg.kind} ${seg.length_px}px`,
    };
  });
}

export function clampBoxToCrop(box: BoxTuple, crop: BoxTuple): BoxTuple {
  return [
    Math.max(box[0], crop[0]),
    Math.max(box[1], crop[1]),
    Math.min(box[2], crop[2]),
    Math.min(box[3], crop[3]),
  ];
}
