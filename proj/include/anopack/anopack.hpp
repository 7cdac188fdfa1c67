// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Umbrella header.

#ifndef ANOPACK_ANOPACK_HPP_
#define ANOPACK_ANOPACK_HPP_

#include "anopack/common.hpp"
#include "anopack/dataset.hpp"
#include "anopack/density.hpp"
#include "anopack/evaluate.hpp"
#include "anopack/hinge_lp.hpp"
#include "anopack/io.hpp"
#include "anopack/lattice.hpp"
#include "anopack/mdl.hpp"
#include "anopack/pipeline.hpp"
#include "anopack/rectangle.hpp"
#include "anopack/refine.hpp"
#include "anopack/select.hpp"
#include "anopack/simplex.hpp"

#endif  // ANOPACK_ANOPACK_HPP_
