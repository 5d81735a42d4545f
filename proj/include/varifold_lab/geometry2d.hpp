#pragma once

namespace vl {

// Area of the intersection of two disks whose centers are d apart.
double lens_area(double r1, double r2, double d);
// Area of disk(center (cx, cy), radius r) intersected with [x0,x1] x [y0,y1].
double disk_rect_area(double cx, double cy, double r, double x0, double x1, double y0, double y1);
// Fraction of the circle of radius rho (centered at the origin) lying inside
// the closed disk of radius R centered at distance d.
double arc_fraction_disk(double rho, double R, double d);
// Fraction of the circle of radius rho centered at (cx, cy) inside [x0,x1] x [y0,y1].
double arc_fraction_rect(double rho, double cx, double cy, double x0, double x1, double y0, double y1);

}  // namespace vl
