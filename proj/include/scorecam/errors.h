/* Copyright 2026 The ScoreCAM Toolkit Authors. All Rights Reserved.

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

#ifndef SCORECAM_ERRORS_H_
#define SCORECAM_ERRORS_H_

#include <stdexcept>
#include <string>

namespace scorecam {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor extents disagree with what an operation requires.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A computation produced (or was handed) a NaN or infinity.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Malformed weight file, image, report or config contents.
class FormatError : public Error {
 public:
  using Error::Error;
};

// The backend does not implement the requested capability.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace scorecam

#endif  // SCORECAM_ERRORS_H_
