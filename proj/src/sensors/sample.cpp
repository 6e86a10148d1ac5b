#include "jetyak/sensors/sample.hpp"

namespace jetyak {

std::string_view to_string(SensorKind k) {
  switch (k) {
    case SensorKind::Depth: return "depth";
    case SensorKind::Wind: return "wind";
    case SensorKind::Current: return "current";
  }
  return "unknown";
}

std::string_view to_string(SampleQuality q) {
  switch (q) {
    case SampleQuality::Ok: return "ok";
    case SampleQuality::Suspect: return "suspect";
    case SampleQuality::Undefined: return "undefined";
  }
  return "unknown";
}

std::optional<SensorKind> sensor_kind_from_string(std::string_view s) {
  for (SensorKind k : {SensorKind::Depth, SensorKind::Wind, SensorKind::Current}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::optional<SampleQuality> quality_from_string(std::string_view s) {
  for (SampleQuality q : {SampleQuality::Ok, SampleQuality::Suspect, SampleQuality::Undefined}) {
    if (to_string(q) == s) return q;
  }
  return std::nullopt;
}

}  // namespace jetyak
