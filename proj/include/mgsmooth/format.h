// Copyright 2026 The mgsmooth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MGSMOOTH_FORMAT_H_
#define MGSMOOTH_FORMAT_H_

#include <cstdio>
#include <string>

namespace mgsmooth {

// %g with the given number of significant digits; negative zero prints as 0.
inline std::string format_sig(double x, int digits = 6) {
  if (x == 0.0) x = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, x);
  return buf;
}

}  // namespace mgsmooth

#endif  // MGSMOOTH_FORMAT_H_
