/*
 * Copyright 2026 The navpred Authors. All rights reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "navpred/geo.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "navpred/error.hpp"

namespace navpred::geo
{
namespace
{

constexpr double deg = std::numbers::pi / 180.0;

// Krueger series through sixth order in the third flattening n, following the
// formulation in Karney, "Transverse Mercator with an accuracy of a few
// nanometers", J. Geodesy 85 (2011).
struct TmSeries
{
  double e = 0.0;       // eccentricity
  double e2m = 0.0;     // 1 - e^2
  double rect = 0.0;    // rectifying radius A
  std::array<double, 6> alpha{};
  std::array<double, 6> beta{};
};

TmSeries make_series()
{
  const double f = 1.0 / wgs84::inverse_flattening;
  const double n = f / (2.0 - f);
  const double n2 = n * n, n3 = n2 * n, n4 = n3 * n, n5 = n4 * n, n6 = n5 * n;
  TmSeries s;
  const double e2 = f * (2.0 - f);
  s.e = std::sqrt(e2);
  s.e2m = 1.0 - e2;
  s.rect = wgs84::semi_major_axis / (1.0 + n) * (1.0 + n2 / 4.0 + n4 / 64.0 + n6 / 256.0);
  s.alpha = {
    n / 2.0 - 2.0 / 3.0 * n2 + 5.0 / 16.0 * n3 + 41.0 / 180.0 * n4 - 127.0 / 288.0 * n5 + 7891.0 / 37800.0 * n6,
    13.0 / 48.0 * n2 - 3.0 / 5.0 * n3 + 557.0 / 1440.0 * n4 + 281.0 / 630.0 * n5 - 1983433.0 / 1935360.0 * n6,
    61.0 / 240.0 * n3 - 103.0 / 140.0 * n4 + 15061.0 / 26880.0 * n5 + 167603.0 / 181440.0 * n6,
    49561.0 / 161280.0 * n4 - 179.0 / 168.0 * n5 + 6601661.0 / 7257600.0 * n6,
    34729.0 / 80640.0 * n5 - 3418889.0 / 1995840.0 * n6,
    212378941.0 / 319334400.0 * n6,
  };
  s.beta = {
    n / 2.0 - 2.0 / 3.0 * n2 + 37.0 / 96.0 * n3 - 1.0 / 360.0 * n4 - 81.0 / 512.0 * n5 + 96199.0 / 604800.0 * n6,
    1.0 / 48.0 * n2 + 1.0 / 15.0 * n3 - 437.0 / 1440.0 * n4 + 46.0 / 105.0 * n5 - 1118711.0 / 3870720.0 * n6,
    17.0 / 480.0 * n3 - 37.0 / 840.0 * n4 - 209.0 / 4480.0 * n5 + 5569.0 / 90720.0 * n6,
    4397.0 / 161280.0 * n4 - 11.0 / 504.0 * n5 - 830251.0 / 7257600.0 * n6,
    4583.0 / 161280.0 * n5 - 108847.0 / 3991680.0 * n6,
    20648693.0 / 638668800.0 * n6,
  };
  return s;
}

const TmSeries& series()
{
  static const TmSeries s = make_series();
  return s;
}

// tan of the conformal latitude from tan of the geodetic latitude.
double conformal_tan(double tau, double e)
{
  const double tau1 = std::hypot(1.0, tau);
  const double sig = std::sinh(e * std::atanh(e * tau / tau1));
  return std::hypot(1.0, sig) * tau - sig * tau1;
}

// Inverse of conformal_tan by Newton iteration; converges in 2-3 steps.
double geodetic_tan(double taup, const TmSeries& s)
{
  double tau = taup / s.e2m;
  const double tol = std::sqrt(std::numeric_limits<double>::epsilon()) / 10.0 * std::max(1.0, std::abs(taup));
  for (int i = 0; i < 8; ++i)
  {
    const double taupa = conformal_tan(tau, s.e);
    const double dtau =
      (taup - taupa) * (1.0 + s.e2m * tau * tau) / (s.e2m * std::hypot(1.0, tau) * std::hypot(1.0, taupa));
    tau += dtau;
    if (std::abs(dtau) < tol)
    {
      break;
    }
  }
  return tau;
}

double meridian_offset(double lon, int zone)
{
  double d = lon - central_meridian(zone);
  d = std::remainder(d, 360.0);
  return d;
}

void validate_zone(int zone)
{
  if (zone < 1 || zone > 60)
  {
    throw Error(ErrorCode::invalid_input, fmt::format("UTM zone {} outside [1, 60]", zone));
  }
}

std::string lower(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

double central_meridian(int zone)
{
  return -183.0 + 6.0 * zone;
}

void validate(const GeoPoint& p)
{
  if (!std::isfinite(p.lat) || !std::isfinite(p.lon) || p.lat < -90.0 || p.lat > 90.0 || p.lon < -180.0 ||
      p.lon >= 180.0)
  {
    throw Error(ErrorCode::invalid_input, fmt::format("coordinate ({}, {}) outside WGS84 ranges", p.lat, p.lon));
  }
}

void validate(const UtmPoint& p)
{
  validate_zone(p.zone);
  if (!std::isfinite(p.easting) || !std::isfinite(p.northing) || p.easting <= 0.0 || p.easting >= 1000000.0)
  {
    throw Error(ErrorCode::invalid_input, fmt::format("UTM easting {} outside (0, 1000000)", p.easting));
  }
  if (p.hemisphere == Hemisphere::north && p.northing < 0.0)
  {
    throw Error(ErrorCode::invalid_input, fmt::format("negative northing {} in northern hemisphere", p.northing));
  }
}

void validate(const CityFrame& frame)
{
  validate_zone(frame.zone);
  if (!std::isfinite(frame.origin_easting) || !std::isfinite(frame.origin_northing))
  {
    throw Error(ErrorCode::invalid_input, fmt::format("frame '{}' has a non-finite origin", frame.name));
  }
}

UtmPoint wgs84_to_utm(const GeoPoint& p, int zone)
{
  validate(p);
  validate_zone(zone);
  const double dlon = meridian_offset(p.lon, zone);
  if (std::abs(dlon) > utm::max_meridian_offset_deg)
  {
    throw Error(ErrorCode::out_of_zone,
                fmt::format("longitude {} is {:.3f} deg from the central meridian of zone {}", p.lon, dlon, zone));
  }
  const TmSeries& s = series();
  const double phi = p.lat * deg;
  const double lam = dlon * deg;
  const double taup = conformal_tan(std::tan(phi), s.e);
  const double xip = std::atan2(taup, std::cos(lam));
  const double etap = std::asinh(std::sin(lam) / std::hypot(taup, std::cos(lam)));

  double xi = xip;
  double eta = etap;
  for (int j = 1; j <= 6; ++j)
  {
    const double a = s.alpha[j - 1];
    xi += a * std::sin(2.0 * j * xip) * std::cosh(2.0 * j * etap);
    eta += a * std::cos(2.0 * j * xip) * std::sinh(2.0 * j * etap);
  }

  UtmPoint out;
  out.zone = zone;
  out.hemisphere = p.lat < 0.0 ? Hemisphere::south : Hemisphere::north;
  out.easting = utm::false_easting + utm::scale_factor * s.rect * eta;
  out.northing = utm::scale_factor * s.rect * xi;
  if (out.hemisphere == Hemisphere::south)
  {
    out.northing += utm::false_northing_south;
  }
  return out;
}

GeoPoint utm_to_wgs84(const UtmPoint& p)
{
  validate(p);
  const TmSeries& s = series();
  const double northing = p.hemisphere == Hemisphere::south ? p.northing - utm::false_northing_south : p.northing;
  const double xi = northing / (utm::scale_factor * s.rect);
  const double eta = (p.easting - utm::false_easting) / (utm::scale_factor * s.rect);

  double xip = xi;
  double etap = eta;
  for (int j = 1; j <= 6; ++j)
  {
    const double b = s.beta[j - 1];
    xip -= b * std::sin(2.0 * j * xi) * std::cosh(2.0 * j * eta);
    etap -= b * std::cos(2.0 * j * xi) * std::sinh(2.0 * j * eta);
  }

  const double sinh_etap = std::sinh(etap);
  const double taup = std::sin(xip) / std::hypot(sinh_etap, std::cos(xip));
  const double lam = std::atan2(sinh_etap, std::cos(xip));
  const double tau = geodetic_tan(taup, s);

  GeoPoint out;
  out.lat = std::atan(tau) / deg;
  out.lon = std::remainder(central_meridian(p.zone) + lam / deg, 360.0);
  if (out.lon >= 180.0)
  {
    out.lon -= 360.0;
  }
  return out;
}

LocalPoint utm_to_local(const UtmPoint& p, const CityFrame& frame)
{
  if (p.zone != frame.zone)
  {
    throw Error(ErrorCode::frame_mismatch,
                fmt::format("point in zone {} but frame '{}' uses zone {}", p.zone, frame.name, frame.zone));
  }
  return {p.easting - frame.origin_easting, p.northing - frame.origin_northing};
}

UtmPoint local_to_utm(const LocalPoint& p, const CityFrame& frame)
{
  UtmPoint out;
  out.zone = frame.zone;
  out.easting = p.x + frame.origin_easting;
  out.northing = p.y + frame.origin_northing;
  // City frames carry no hemisphere flag; both presets are northern.
  out.hemisphere = Hemisphere::north;
  return out;
}

LocalPoint geo_to_local(const GeoPoint& p, const CityFrame& frame)
{
  return utm_to_local(wgs84_to_utm(p, frame.zone), frame);
}

GeoPoint local_to_geo(const LocalPoint& p, const CityFrame& frame)
{
  return utm_to_wgs84(local_to_utm(p, frame));
}

CityFrame miami_frame()
{
  return {"miami", 17, 580560.0088, 2850959.9999};
}

CityFrame pittsburgh_frame()
{
  return {"pittsburgh", 17, 583710.0070, 4477259.9999};
}

std::vector<CityFrame> read_frames(std::istream& in)
{
  std::vector<CityFrame> frames;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line))
  {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#')
    {
      continue;
    }
    std::istringstream fields(line);
    CityFrame frame;
    std::string extra;
    if (!(fields >> frame.name >> frame.zone >> frame.origin_easting >> frame.origin_northing) || (fields >> extra))
    {
      throw Error(ErrorCode::parse, fmt::format("frame file line {}: expected 'name zone easting northing'", line_no));
    }
    validate(frame);
    frames.push_back(std::move(frame));
  }
  return frames;
}

std::vector<CityFrame> load_frames(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw Error(ErrorCode::io, fmt::format("cannot open frame file '{}'", path));
  }
  return read_frames(in);
}

CityFrame find_frame(const std::string& name, const std::vector<CityFrame>& extra)
{
  const std::string key = lower(name);
  for (const auto& f : extra)
  {
    if (lower(f.name) == key)
    {
      return f;
    }
  }
  for (const auto& f : {miami_frame(), pittsburgh_frame()})
  {
    if (f.name == key)
    {
      return f;
    }
  }
  throw Error(ErrorCode::not_found, fmt::format("unknown city frame '{}'", name));
}

}  // namespace navpred::geo
