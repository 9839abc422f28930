// Copyright (c) 2026 The dylo Authors. All Rights Reserved.
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

#include <vector>

#include "dylo/box.hpp"
#include "dylo/image.hpp"

namespace dylo::tools {

// Returns an RGB copy of `image` with each box outlined in its class colour.
// Boxes are in source pixels; anything outside the image is clipped.
Image draw_boxes(const Image& image, const std::vector<DetBox>& boxes, int thickness = 2);

}  // namespace dylo::tools
