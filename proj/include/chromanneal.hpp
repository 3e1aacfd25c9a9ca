// Copyright 2026 The chromanneal Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#pragma once

#include "chromanneal/common.hpp"
#include "chromanneal/embed.hpp"
#include "chromanneal/eval.hpp"
#include "chromanneal/graph.hpp"
#include "chromanneal/ingest.hpp"
#include "chromanneal/learn.hpp"
#include "chromanneal/model.hpp"
#include "chromanneal/pipeline.hpp"
#include "chromanneal/sample_set.hpp"
#include "chromanneal/sampler.hpp"
#include "chromanneal/shape.hpp"
#include "chromanneal/stats.hpp"
#include "chromanneal/topology.hpp"
