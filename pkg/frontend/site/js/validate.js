/** Client-side record validation mirroring the server's rules, so the
 * save button only enables for records the service will accept. */
const MIN_SEGMENT_LEN = 1e-9;
const IDENTICAL_TOL = 1e-6;
function segLength(s) {
    return Math.hypot(s.p1[0] - s.p0[0], s.p1[1] - s.p0[1]);
}
function close(a, b) {
    return Math.hypot(a[0] - b[0], a[1] - b[1]) < IDENTICAL_TOL;
}
export function validateRecord(record) {
    const errors = [];
    if (record.schema_version !== 1) {
        errors.push({ field: "schema_version", message: "must be 1" });
    }
    if (!record.image_id) {
        errors.push({ field: "image_id", message: "required" });
    }
    const [w, h] = record.image_size;
    if (!(w > 0 && h > 0)) {
        errors.push({ field: "image_size", message: "must be positive" });
    }
    const [vx, vy, vw] = record.target_vp;
    if (![vx, vy, vw].every(Number.isFinite) || Math.hypot(vx, vy, vw) < 1e-9) {
        errors.push({ field: "target_vp", message: "must be a valid homogeneous point" });
    }
    if (record.pairs.length === 0) {
        errors.push({ field: "pairs", message: "at least one outline pair is required" });
    }
    if (!Number.isInteger(record.dilation_px) || record.dilation_px < 0) {
        errors.push({ field: "dilation_px", message: "must be a non-negative integer" });
    }
    // outline endpoints must stay inside a box twice the image size,
    // centered on the image (the VP itself may be anywhere)
    const xLo = -w / 2, xHi = 1.5 * w, yLo = -h / 2, yHi = 1.5 * h;
    record.pairs.forEach((pair, i) => {
        for (const [name, seg] of [["original", pair.original], ["desired", pair.desired]]) {
            if (segLength(seg) < MIN_SEGMENT_LEN) {
                errors.push({ field: `pairs[${i}].${name}`, message: "endpoints coincide" });
            }
            for (const pt of [seg.p0, seg.p1]) {
                if (!(pt[0] >= xLo && pt[0] <= xHi && pt[1] >= yLo && pt[1] <= yHi)) {
                    errors.push({
                        field: `pairs[${i}].${name}`,
                        message: "endpoint outside the 2x image bounding box",
                    });
                    break;
                }
            }
        }
        const same = (close(pair.original.p0, pair.desired.p0) && close(pair.original.p1, pair.desired.p1)) ||
            (close(pair.original.p0, pair.desired.p1) && close(pair.original.p1, pair.desired.p0));
        if (same) {
            errors.push({ field: `pairs[${i}]`, message: "original and desired outlines are identical" });
        }
    });
    return errors;
}
