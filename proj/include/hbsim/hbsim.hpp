// SPDX-License-Identifier: Apache-2.0
//
// hbsim: hybrid analog-digital beamforming simulation library
// Copyright (C) 2026 hbsim contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef hbsim_hbsim_H
#define hbsim_hbsim_H

#include "hbsim/bounds.hpp"
#include "hbsim/channel.hpp"
#include "hbsim/cpps.hpp"
#include "hbsim/harness.hpp"
#include "hbsim/hybrid.hpp"
#include "hbsim/rng.hpp"
#include "hbsim/scheduler.hpp"
#include "hbsim/zf.hpp"

#endif
