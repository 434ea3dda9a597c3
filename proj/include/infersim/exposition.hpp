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

#ifndef INFERSIM_EXPOSITION_HPP_
#define INFERSIM_EXPOSITION_HPP_

#include <string>

#include "infersim/metrics.hpp"

namespace infersim {

/// Renders the registry in the Prometheus text exposition format: one
/// `# HELP` and `# TYPE` pair per family followed by its samples, no
/// timestamps. Families with registered descriptions appear even when they
/// hold no samples yet, so scrapes of an idle registry still expose headers.
std::string render_prometheus(const MetricsRegistry& registry);

std::string escape_label_value(const std::string& value);

/// Minimal formatting: integral values render without a decimal point.
std::string format_metric_value(double value);

}  // namespace infersim

#endif  // INFERSIM_EXPOSITION_HPP_
