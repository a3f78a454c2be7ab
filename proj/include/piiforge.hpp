// Copyright 2026 The pii-forge Authors.
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

#pragma once

#include "piiforge/annotator.hpp"
#include "piiforge/conll.hpp"
#include "piiforge/corpus.hpp"
#include "piiforge/dates.hpp"
#include "piiforge/error.hpp"
#include "piiforge/fedsim.hpp"
#include "piiforge/fuzzymatch.hpp"
#include "piiforge/html.hpp"
#include "piiforge/infobox.hpp"
#include "piiforge/nereval.hpp"
#include "piiforge/random.hpp"
#include "piiforge/review.hpp"
#include "piiforge/review_server.hpp"
#include "piiforge/synth.hpp"
#include "piiforge/tagger.hpp"
