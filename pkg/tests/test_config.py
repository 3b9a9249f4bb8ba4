import json
import os
import tempfile
import unittest

from dynamics.errors import ConfigurationError
from utils.config import DEFAULT_PRECISION, HIGH_PRECISION, PRECISION_ENV, RunConfig, load_config


class RunConfigTests(unittest.TestCase):
    def test_defaults(self):
        config = load_config("classify", environ={})
        self.assertEqual(config.truncation, 64)
        self.assertEqual(config.grid, 512)
        self.assertEqual(config.max_iter, 10 ** 4)
        self.assertEqual(config.bits, DEFAULT_PRECISION)
        self.assertIsNone(config.seed)
        self.assertEqual(load_config("cycles", environ={}).bits, HIGH_PRECISION)

    def test_layering(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "run.json")
            with open(path, "w", encoding="utf-8") as f:
                json.dump({"truncation": 32, "precision": 128, "radius": 0.5}, f)

            from_file = load_config("hedgehog", path, environ={})
            self.assertEqual((from_file.truncation, from_file.bits, from_file.radius), (32, 128, 0.5))

            from_env = load_config("hedgehog", path, environ={PRECISION_ENV: "192"})
            self.assertEqual(from_env.bits, 192)

            from_flags = load_config("hedgehog", path, {"precision": 320, "truncation": None},
                                     environ={PRECISION_ENV: "192"})
            self.assertEqual((from_flags.bits, from_flags.truncation), (320, 32))

    def test_unknown_keys_and_bad_files(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "run.json")
            with open(path, "w", encoding="utf-8") as f:
                json.dump({"truncaton": 32}, f)
            with self.assertRaises(ConfigurationError):
                load_config("classify", path, environ={})
            with self.assertRaises(ConfigurationError):
                load_config("classify", os.path.join(tmpdir, "missing.json"), environ={})

    def test_ranges(self):
        for bad in ({"truncation": 4}, {"truncation": 1024}, {"precision": 32}, {"grid": 2},
                    {"radius": 0}, {"workers": -1}, {"field": "decimal"}, {"max_iter": 0}):
            with self.assertRaises(ConfigurationError, msg=str(bad)):
                load_config("classify", overrides=bad, environ={})
        with self.assertRaises(ConfigurationError):
            load_config("classify", overrides={"grid": "many"}, environ={})

    def test_json_view(self):
        data = RunConfig(command="orbit").to_json()
        self.assertEqual(data["precision"], HIGH_PRECISION)
        self.assertNotIn("workers", data)


if __name__ == "__main__":
    unittest.main()
