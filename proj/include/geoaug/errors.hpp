#pragma once

#include <stdexcept>
#include <string>

namespace geoaug {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Geometry failures.
class BehindCamera : public Error {
 public:
  BehindCamera() : Error("point is at or behind the camera plane (Z <= 0)") {}
};

class DegenerateCue : public Error {
 public:
  explicit DegenerateCue(const std::string& what) : Error("degenerate depth cue: " + what) {}
};

class AboveHorizon : public Error {
 public:
  AboveHorizon() : Error("contact row is at or above the horizon line") {}
};

class ObjectTooClose : public Error {
 public:
  explicit ObjectTooClose(double depth)
      : Error("object depth " + std::to_string(depth) + " m falls below the minimum depth") {}
};

// Parsing and codec failures.
class ParseError : public Error {
 public:
  enum class Kind { MissingKey, MalformedNumber, ElementCount, FieldCount, InvalidBox, NonFinite, Decode, MultiChannel };

  ParseError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class MissingDepthMap : public Error {
 public:
  MissingDepthMap() : Error("sample has no depth map") {}
  explicit MissingDepthMap(const std::string& what) : Error(what) {}
};

class MatchError : public Error {
 public:
  using Error::Error;
};

}  // namespace geoaug
