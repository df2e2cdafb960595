#include "trajad/trajgeom.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "trajad/errors.hpp"

namespace trajad {

BoxCorners to_corners(const BoundingBox& box) noexcept {
  return {box.x - box.w / 2.0, box.y - box.h / 2.0, box.x + box.w / 2.0, box.y + box.h / 2.0};
}

BoundingBox from_corners(const BoxCorners& c) noexcept {
  const double w = c.right - c.left;
  const double h = c.bottom - c.top;
  return {c.left + w / 2.0, c.top + h / 2.0, w, h};
}

BoundingBox from_top_left(double left, double top, double w, double h) noexcept {
  return {left + w / 2.0, top + h / 2.0, w, h};
}

double area(const BoundingBox& box) noexcept { return box.w * box.h; }

BoundingBox enclosing_box(const BoundingBox& a, const BoundingBox& b) noexcept {
  const BoxCorners ca = to_corners(a);
  const BoxCorners cb = to_corners(b);
  return from_corners({std::min(ca.left, cb.left), std::min(ca.top, cb.top),
                       std::max(ca.right, cb.right), std::max(ca.bottom, cb.bottom)});
}

bool is_valid(const BoundingBox& box) noexcept {
  return std::isfinite(box.x) && std::isfinite(box.y) && std::isfinite(box.w) &&
         std::isfinite(box.h) && box.w > 0.0 && box.h > 0.0;
}

void require_valid(const BoundingBox& box, std::string_view what) {
  if (!is_valid(box)) {
    throw InputDomainError(std::string(what) + " must have finite fields and positive size (x=" +
                           std::to_string(box.x) + " y=" + std::to_string(box.y) +
                           " w=" + std::to_string(box.w) + " h=" + std::to_string(box.h) + ")");
  }
}

namespace {

// Overlap along one axis; touching edges give zero.
double overlap(double lo_a, double hi_a, double lo_b, double hi_b) noexcept {
  return std::max(0.0, std::min(hi_a, hi_b) - std::max(lo_a, lo_b));
}

double intersection_unchecked(const BoundingBox& a, const BoundingBox& b) noexcept {
  const BoxCorners ca = to_corners(a);
  const BoxCorners cb = to_corners(b);
  return overlap(ca.left, ca.right, cb.left, cb.right) *
         overlap(ca.top, ca.bottom, cb.top, cb.bottom);
}

}  // namespace

double intersection_area(const BoundingBox& a, const BoundingBox& b) {
  require_valid(a, "first box");
  require_valid(b, "second box");
  return intersection_unchecked(a, b);
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double inter = intersection_area(a, b);
  const double uni = area(a) + area(b) - inter;
  return inter / uni;
}

double giou(const BoundingBox& a, const BoundingBox& b) {
  const double inter = intersection_area(a, b);
  const double uni = area(a) + area(b) - inter;
  const double enclosing = area(enclosing_box(a, b));
  // The enclosing box can round below the union when one box contains the other.
  return inter / uni - std::max(0.0, enclosing - uni) / enclosing;
}

double measure_m1(const BoundingBox& gt, const BoundingBox& pred) { return 1.0 - iou(gt, pred); }

double measure_m2(const BoundingBox& gt, const BoundingBox& pred) { return 1.0 - giou(gt, pred); }

double measure_m3(const BoundingBox& gt, const BoundingBox& pred) {
  for (const BoundingBox* box : {&gt, &pred}) {
    if (!std::isfinite(box->x) || !std::isfinite(box->y) || !std::isfinite(box->w) ||
        !std::isfinite(box->h)) {
      throw InputDomainError("L2 measure requires finite box fields");
    }
  }
  const double dx = gt.x - pred.x;
  const double dy = gt.y - pred.y;
  const double dw = gt.w - pred.w;
  const double dh = gt.h - pred.h;
  return std::sqrt(dx * dx + dy * dy + dw * dw + dh * dh);
}

double prediction_error(Measure measure, const BoundingBox& gt, const BoundingBox& pred) {
  switch (measure) {
    case Measure::kOneMinusIou:
      return measure_m1(gt, pred);
    case Measure::kOneMinusGiou:
      return measure_m2(gt, pred);
    case Measure::kL2:
      return measure_m3(gt, pred);
  }
  throw std::logic_error("unknown measure");
}

std::string_view to_string(Measure measure) noexcept {
  switch (measure) {
    case Measure::kOneMinusIou:
      return "m1";
    case Measure::kOneMinusGiou:
      return "m2";
    case Measure::kL2:
      return "m3";
  }
  return "?";
}

Measure parse_measure(std::string_view text) {
  if (text == "m1") return Measure::kOneMinusIou;
  if (text == "m2") return Measure::kOneMinusGiou;
  if (text == "m3") return Measure::kL2;
  throw ConfigError("unknown measure '" + std::string(text) + "' (expected m1, m2 or m3)");
}

}  // namespace trajad
