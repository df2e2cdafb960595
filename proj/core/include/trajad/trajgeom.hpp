#pragma once

#include <string_view>

namespace trajad {

/// Axis-aligned box in center format: (x, y) is the center, (w, h) the size,
/// all in pixels.
struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Same box as (left, top, right, bottom).
struct BoxCorners {
  double left = 0.0;
  double top = 0.0;
  double right = 0.0;
  double bottom = 0.0;

  friend bool operator==(const BoxCorners&, const BoxCorners&) = default;
};

BoxCorners to_corners(const BoundingBox& box) noexcept;
BoundingBox from_corners(const BoxCorners& corners) noexcept;
BoundingBox from_top_left(double left, double top, double w, double h) noexcept;

double area(const BoundingBox& box) noexcept;

/// Smallest axis-aligned box containing both `a` and `b`.
BoundingBox enclosing_box(const BoundingBox& a, const BoundingBox& b) noexcept;

/// True when every field is finite and w, h > 0.
bool is_valid(const BoundingBox& box) noexcept;

/// Throws InputDomainError unless is_valid(box). `what` prefixes the message.
void require_valid(const BoundingBox& box, std::string_view what = "box");

double intersection_area(const BoundingBox& a, const BoundingBox& b);

double iou(const BoundingBox& a, const BoundingBox& b);

/// IOU minus the fraction of the enclosing box not covered by the union.
double giou(const BoundingBox& a, const BoundingBox& b);

enum class Measure { kOneMinusIou, kOneMinusGiou, kL2 };

/// 1 - IOU(gt, pred).
double measure_m1(const BoundingBox& gt, const BoundingBox& pred);
/// 1 - GIOU(gt, pred).
double measure_m2(const BoundingBox& gt, const BoundingBox& pred);
/// Euclidean norm of (gt - pred) over (x, y, w, h).
double measure_m3(const BoundingBox& gt, const BoundingBox& pred);

double prediction_error(Measure measure, const BoundingBox& gt, const BoundingBox& pred);

/// "m1", "m2", "m3".
std::string_view to_string(Measure measure) noexcept;
Measure parse_measure(std::string_view text);

}  // namespace trajad
