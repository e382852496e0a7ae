// Copyright 2026 The closs Authors. All Rights Reserved.
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

#pragma once

#include "closs/components.hpp"
#include "closs/error.hpp"
#include "closs/fft.hpp"
#include "closs/gradcheck.hpp"
#include "closs/losses.hpp"
#include "closs/matrix.hpp"
#include "closs/metrics.hpp"
#include "closs/mlp.hpp"
#include "closs/optimizer.hpp"
#include "closs/perceptual.hpp"
#include "closs/reports.hpp"
#include "closs/signal.hpp"
#include "closs/signal_io.hpp"
#include "closs/speech_level.hpp"
#include "closs/stft.hpp"
#include "closs/synthetic.hpp"
#include "closs/trainer.hpp"
