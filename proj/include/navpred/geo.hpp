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

#ifndef NAVPRED_GEO_HPP
#define NAVPRED_GEO_HPP

#include <istream>
#include <string>
#include <vector>

namespace navpred::geo
{

/// WGS84 position in degrees.
struct GeoPoint
{
  double lat = 0.0;
  double lon = 0.0;
};

enum class Hemisphere
{
  north,
  south,
};

struct UtmPoint
{
  double easting = 0.0;
  double northing = 0.0;
  int zone = 0;
  Hemisphere hemisphere = Hemisphere::north;
};

/// Local Cartesian frame obtained by subtracting a fixed UTM origin.
struct CityFrame
{
  std::string name;
  int zone = 0;
  double origin_easting = 0.0;
  double origin_northing = 0.0;
};

/// Position in meters in a city frame.
struct LocalPoint
{
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const LocalPoint&, const LocalPoint&) = default;
};

namespace wgs84
{
inline constexpr double semi_major_axis = 6378137.0;
inline constexpr double inverse_flattening = 298.257223563;
}  // namespace wgs84

namespace utm
{
inline constexpr double scale_factor = 0.9996;
inline constexpr double false_easting = 500000.0;
inline constexpr double false_northing_south = 10000000.0;
/// Half-width of the accepted longitude band around a zone's central meridian.
inline constexpr double max_meridian_offset_deg = 3.5;
}  // namespace utm

double central_meridian(int zone);

/// Transverse Mercator projection into a caller-chosen zone. The zone is never
/// derived from the longitude; points up to 3.5 degrees off the central
/// meridian are accepted.
UtmPoint wgs84_to_utm(const GeoPoint& p, int zone);
GeoPoint utm_to_wgs84(const UtmPoint& p);

LocalPoint utm_to_local(const UtmPoint& p, const CityFrame& frame);
UtmPoint local_to_utm(const LocalPoint& p, const CityFrame& frame);

LocalPoint geo_to_local(const GeoPoint& p, const CityFrame& frame);
GeoPoint local_to_geo(const LocalPoint& p, const CityFrame& frame);

void validate(const GeoPoint& p);
void validate(const UtmPoint& p);
void validate(const CityFrame& frame);

// Argoverse city origins.
CityFrame miami_frame();
CityFrame pittsburgh_frame();

/// Reads frames from lines of `name zone origin_easting origin_northing`.
/// Blank lines and lines starting with '#' are skipped.
std::vector<CityFrame> read_frames(std::istream& in);
std::vector<CityFrame> load_frames(const std::string& path);

/// Looks up a built-in preset (case-insensitive) or one of `extra`.
CityFrame find_frame(const std::string& name, const std::vector<CityFrame>& extra = {});

}  // namespace navpred::geo

#endif  // NAVPRED_GEO_HPP
