/* Copyright 2026 The PICE Authors
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

#pragma once

#include "pice/backends.hpp"
#include "pice/cloud_scheduler.hpp"
#include "pice/cost_model.hpp"
#include "pice/dispatcher.hpp"
#include "pice/edge_runtime.hpp"
#include "pice/ensemble.hpp"
#include "pice/error.hpp"
#include "pice/finetune.hpp"
#include "pice/profiler.hpp"
#include "pice/random.hpp"
#include "pice/remote_backend.hpp"
#include "pice/sim/config.hpp"
#include "pice/sim/engine.hpp"
#include "pice/sim/ps_server.hpp"
#include "pice/sim/report.hpp"
#include "pice/text.hpp"
