/* Copyright 2026 The Infersim Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "infersim/exposition.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <string_view>
#include <vector>

namespace infersim {

namespace {

struct FamilyInfo {
  std::string_view name;
  std::string_view type;
  std::string_view help;
};

constexpr std::array<FamilyInfo, 9> kKnownFamilies{{
    {"requests_total", "counter", "Requests seen by the gateway, by model and outcome."},
    {"ready_replicas", "gauge", "Backend instances currently accepting work."},
    {"starting_replicas", "gauge", "Backend instances still warming up."},
    {"draining_replicas", "gauge", "Backend instances finishing queued work before shutdown."},
    {"client_count", "gauge", "Concurrent load-generator clients."},
    {"gpu_utilization", "gauge", "Recent busy fraction of each backend's execution unit."},
    {"queue_latency_seconds", "gauge", "Recent average request queue wait across backends."},
    {"end_to_end_latency_p50_seconds", "gauge", "Recent median end-to-end request latency."},
    {"in_flight_requests", "gauge", "Requests admitted and not yet answered."},
}};

void append_sample(std::string& out, const std::string& name,
                   const Labels& labels, const std::string& value) {
  out += name;
  if (!labels.empty()) {
    out += '{';
    bool first = true;
    for (const auto& [key, val] : labels) {
      if (!first) out += ',';
      first = false;
      out += key;
      out += "=\"";
      out += escape_label_value(val);
      out += '"';
    }
    out += '}';
  }
  out += ' ';
  out += value;
  out += '\n';
}

}  // namespace

std::string escape_label_value(const std::string& value) {
  std::string out;
  out.reserve(value.size());
  for (char c : value) {
    switch (c) {
      case '\\':
        out += "\\\\";
        break;
      case '"':
        out += "\\\"";
        break;
      case '\n':
        out += "\\n";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string format_metric_value(double value) {
  if (std::isfinite(value) && value == std::floor(value) &&
      std::fabs(value) < 9.007199254740992e15) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f", value);
    return buf;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", value);
  return buf;
}

std::string render_prometheus(const MetricsRegistry& registry) {
  std::map<std::string, std::vector<std::pair<Labels, std::string>>> by_family;
  std::map<std::string, std::string_view> family_type;

  for (const CounterSample& sample : registry.counters()) {
    by_family[sample.name].emplace_back(sample.labels,
                                        std::to_string(sample.value));
    family_type.emplace(sample.name, "counter");
  }
  for (const GaugeSample& sample : registry.gauges()) {
    by_family[sample.name].emplace_back(sample.labels,
                                        format_metric_value(sample.value));
    family_type.emplace(sample.name, "gauge");
  }

  std::string out;
  auto render_family = [&](const std::string& name, std::string_view type,
                           std::string_view help) {
    out += "# HELP ";
    out += name;
    out += ' ';
    out += help;
    out += '\n';
    out += "# TYPE ";
    out += name;
    out += ' ';
    out += type;
    out += '\n';
    auto it = by_family.find(name);
    if (it != by_family.end()) {
      for (const auto& [labels, value] : it->second) {
        append_sample(out, name, labels, value);
      }
      by_family.erase(it);
    }
  };

  for (const FamilyInfo& family : kKnownFamilies) {
    render_family(std::string(family.name), family.type, family.help);
  }
  while (!by_family.empty()) {
    std::string name = by_family.begin()->first;
    render_family(name, family_type.at(name), "Application metric.");
  }
  return out;
}

}  // namespace infersim
