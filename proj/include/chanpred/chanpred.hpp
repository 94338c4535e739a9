// SPDX-License-Identifier: Apache-2.0
//
// chanpred - channel predictors for time-variant flat-fading channels
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

#pragma once

#include "chanpred/errors.hpp"
#include "chanpred/numerics.hpp"
#include "chanpred/random.hpp"
#include "chanpred/channel.hpp"
#include "chanpred/covariance.hpp"
#include "chanpred/lmmse.hpp"
#include "chanpred/gridded.hpp"
#include "chanpred/structured.hpp"
#include "chanpred/nn.hpp"
#include "chanpred/model_io.hpp"
#include "chanpred/harness.hpp"
