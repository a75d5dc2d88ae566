/** Pan/zoom viewport: screen = scale * data + offset, always invertible. */

export interface Viewport {
  scale: number;
  tx: number;
  ty: number;
}

export function toScreen(view: Viewport, x: number, y: number): [number, number] {
  return [view.scale * x + view.tx, view.scale * y + view.ty];
}

export function toData(view: Viewport, sx: number, sy: number): [number, number] {
  return [(sx - view.tx) / view.scale, (sy - view.ty) / view.scale];
}

/** Zoom by factor keeping the given screen point fixed. */
export function zoomAt(view: Viewport, sx: number, sy: number,
                       factor: number): Viewport {
  const scale = view.scale * factor;
  return {
    scale,
    tx: sx - (sx - view.tx) * factor,
    ty: sy - (sy - view.ty) * factor,
  };
}

export function pan(view: Viewport, dx: number, dy: number): Viewport {
  return { scale: view.scale, tx: view.tx + dx, ty: view.ty + dy };
}

/** Viewport framing all points with a margin, preserving aspect ratio. */
export function fitToData(xs: number[], ys: number[], width: number,
                          height: number, margin = 20): Viewport {
  if (xs.length === 0) return { scale: 1, tx: width / 2, ty: height / 2 };
  const minX = Math.min(...xs);
  const maxX = Math.max(...xs);
  const minY = Math.min(...ys);
  const maxY = Math.max(...ys);
  const spanX = Math.max(maxX - minX, 1e-9);
  const spanY = Math.max(maxY - minY, 1e-9);
  const scale = Math.min((width - 2 * margin) / spanX,
                         (height - 2 * margin) / spanY);
  return {
    scale,
    tx: width / 2 - scale * (minX + maxX) / 2,
    ty: height / 2 - scale * (minY + maxY) / 2,
  };
}
