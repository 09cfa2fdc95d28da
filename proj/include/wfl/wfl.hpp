#pragma once

#include "wfl/baselines.hpp"
#include "wfl/channel.hpp"
#include "wfl/config.hpp"
#include "wfl/dataset.hpp"
#include "wfl/errors.hpp"
#include "wfl/geometry.hpp"
#include "wfl/harness.hpp"
#include "wfl/locengine.hpp"
#include "wfl/metric.hpp"
#include "wfl/model.hpp"
#include "wfl/parallel.hpp"
#include "wfl/radio.hpp"
#include "wfl/scene.hpp"
#include "wfl/svg.hpp"
#include "wfl/theory.hpp"
